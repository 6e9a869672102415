#include "affectbench/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace affectbench {

std::string_view to_string(Dimension d) { return d == Dimension::arousal ? "arousal" : "valence"; }

void AffectSequence::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (i > 0 && s.frame_index <= samples[i - 1].frame_index) {
      throw ValidationError(participant_id + "/" + condition + ": frame indices not strictly increasing at " +
                            std::to_string(s.frame_index));
    }
    const bool ok = s.arousal && s.valence && in_affect_range(*s.arousal) && in_affect_range(*s.valence);
    if (s.valid != ok) {
      throw ValidationError(participant_id + "/" + condition + ": inconsistent validity at frame " +
                            std::to_string(s.frame_index));
    }
  }
}

PairedSequence align(const AffectSequence& original, const AffectSequence& condition) {
  if (original.participant_id != condition.participant_id) {
    throw ValidationError("cannot align participant '" + original.participant_id + "' with '" +
                          condition.participant_id + "'");
  }
  if (original.condition == condition.condition) {
    throw ValidationError("cannot align condition '" + condition.condition + "' with itself");
  }

  std::unordered_map<std::int64_t, const AffectSample*> by_index;
  by_index.reserve(condition.samples.size());
  for (const auto& s : condition.samples) by_index.emplace(s.frame_index, &s);

  std::vector<std::int64_t> idx;
  std::vector<std::pair<const AffectSample*, const AffectSample*>> pairs;
  for (const auto& o : original.samples) {
    const auto it = by_index.find(o.frame_index);
    if (it == by_index.end() || !o.valid || !it->second->valid) continue;
    idx.push_back(o.frame_index);
    pairs.emplace_back(&o, it->second);
  }

  PairedSequence p;
  p.participant_id = original.participant_id;
  p.original_condition = original.condition;
  p.condition = condition.condition;
  p.frame_indices = std::move(idx);
  const auto n = Eigen::Index(pairs.size());
  p.original.resize(n, 2);
  p.condition_values.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.original.row(i) << *pairs[i].first->arousal, *pairs[i].first->valence;
    p.condition_values.row(i) << *pairs[i].second->arousal, *pairs[i].second->valence;
  }
  return p;
}

DeviationSeries deviation(const PairedSequence& paired, Dimension dimension) {
  const int col = dimension == Dimension::arousal ? 0 : 1;
  DeviationSeries d;
  d.participant_id = paired.participant_id;
  d.condition = paired.condition;
  d.dimension = dimension;
  d.frame_indices = paired.frame_indices;
  d.original = paired.original.col(col);
  d.condition_values = paired.condition_values.col(col);
  d.deltas = d.condition_values - d.original;
  return d;
}

AgreementStats agreement(const DeviationSeries& dev, double zero_tolerance) {
  AgreementStats s;
  const auto r = pearson(dev.original, dev.condition_values);
  s.pearson = r.value;
  s.pearson_degenerate = r.degenerate;
  s.ccc = ccc(dev.original, dev.condition_values);
  const TrendFrequency t = trend_frequency(dev.deltas, zero_tolerance);
  s.pos_pct = t.pos_pct;
  s.neg_pct = t.neg_pct;
  s.zero_pct = t.zero_pct;
  s.mean_delta = dev.deltas.mean();
  s.min_delta = dev.deltas.minCoeff();
  s.max_delta = dev.deltas.maxCoeff();
  s.n = dev.size();
  return s;
}

const ConditionSummary* Summary::find(std::string_view condition, Dimension d) const {
  for (const auto& r : rows) {
    if (r.condition == condition && r.dimension == d) return &r;
  }
  return nullptr;
}

std::vector<std::string> Summary::conditions() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.condition) == out.end()) out.push_back(r.condition);
  }
  return out;
}

namespace {
double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

Summary aggregate(std::span<const CellResult> cells) {
  if (cells.empty()) throw ValidationError("aggregate needs at least one evaluated cell");

  std::vector<std::pair<std::string, Dimension>> order;
  std::map<std::pair<std::string, Dimension>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) {
    auto key = std::make_pair(c.condition, c.dimension);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&c);
  }

  Summary summary;
  for (const auto& key : order) {
    const auto& group = groups.at(key);
    ConditionSummary row;
    row.condition = key.first;
    row.dimension = key.second;

    std::vector<double> values;
    double pos = 0, neg = 0, zero = 0;
    std::int64_t pooled_n = 0, pooled_pos = 0, pooled_neg = 0;
    for (const CellResult* c : group) {
      values.push_back(c->stats.ccc);
      row.distribution.emplace_back(c->participant_id, c->stats.ccc);
      pos += c->stats.pos_pct;
      neg += c->stats.neg_pct;
      zero += c->stats.zero_pct;
      // Percentages are exact multiples of 100/n, so counts round back exactly.
      pooled_n += c->stats.n;
      pooled_pos += std::llround(c->stats.pos_pct * double(c->stats.n) / 100.0);
      pooled_neg += std::llround(c->stats.neg_pct * double(c->stats.n) / 100.0);
    }
    const double m = double(group.size());
    row.ccc_min = *std::min_element(values.begin(), values.end());
    row.ccc_max = *std::max_element(values.begin(), values.end());
    row.ccc_mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    row.ccc_median = median(values);
    row.trend_participant_mean = {pos / m, neg / m, zero / m};
    if (pooled_n > 0) {
      const double n = double(pooled_n);
      row.trend_pooled = {100.0 * double(pooled_pos) / n, 100.0 * double(pooled_neg) / n,
                          100.0 * double(pooled_n - pooled_pos - pooled_neg) / n};
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::vector<SummaryTableRow> summary_table(const Summary& summary) {
  std::vector<SummaryTableRow> table;
  for (const auto& condition : summary.conditions()) {
    SummaryTableRow row;
    row.condition = condition;
    if (const auto* a = summary.find(condition, Dimension::arousal)) {
      row.arousal_min_ccc = a->ccc_min;
      row.arousal_max_ccc = a->ccc_max;
    }
    if (const auto* v = summary.find(condition, Dimension::valence)) {
      row.valence_min_ccc = v->ccc_min;
      row.valence_max_ccc = v->ccc_max;
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace affectbench
