#pragma once

#include "affectbench/affect.hpp"
#include "affectbench/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace affectbench {

namespace detail {
template <typename Derived>
const Eigen::ArrayBase<Derived>& as_array(const Eigen::ArrayBase<Derived>& a) {
  return a;
}
template <typename Derived>
auto as_array(const Eigen::MatrixBase<Derived>& m) {
  return m.array();
}
}  // namespace detail

/// Population (divide-by-n) first and second moments of a pair of series.
template <typename Scalar>
struct PairMoments {
  Scalar mean_x{0};
  Scalar mean_y{0};
  Scalar var_x{0};
  Scalar var_y{0};
  Scalar cov{0};
  Eigen::Index n = 0;
};

template <typename Scalar>
struct Correlation {
  Scalar value{0};
  /// Set when either series has zero variance; value is then 0.
  bool degenerate = false;
};

/// Throws ValidationError on length mismatch or fewer than two samples.
template <typename DerivedX, typename DerivedY>
PairMoments<typename DerivedX::Scalar> pair_moments(const Eigen::DenseBase<DerivedX>& x,
                                                    const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  static_assert(std::is_same_v<Scalar, typename DerivedY::Scalar>, "mixed scalar types");
  if (x.size() != y.size()) {
    throw ValidationError("series length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw ValidationError("need at least 2 paired samples, got " + std::to_string(x.size()));

  const auto& xa = detail::as_array(x.derived());
  const auto& ya = detail::as_array(y.derived());
  PairMoments<Scalar> m;
  m.n = x.size();
  m.mean_x = xa.mean();
  m.mean_y = ya.mean();
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> dx = xa - m.mean_x;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> dy = ya - m.mean_y;
  m.var_x = dx.square().mean();
  m.var_y = dy.square().mean();
  m.cov = (dx * dy).mean();
  return m;
}

template <typename DerivedX, typename DerivedY>
Correlation<typename DerivedX::Scalar> pearson(const Eigen::DenseBase<DerivedX>& x,
                                               const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto m = pair_moments(x, y);
  const Scalar scale = std::sqrt(m.var_x) * std::sqrt(m.var_y);
  if (!(scale > Scalar(0))) return {Scalar(0), true};
  return {std::clamp(m.cov / scale, Scalar(-1), Scalar(1)), false};
}

/// Concordance correlation coefficient in covariance form,
///   2 cov(x, y) / (var x + var y + (mean x - mean y)^2),
/// which equals 2 rho sx sy / (...) whenever both variances are positive.
/// Both-constant-and-equal returns 1; one constant series returns 0.
template <typename DerivedX, typename DerivedY>
typename DerivedX::Scalar ccc(const Eigen::DenseBase<DerivedX>& x, const Eigen::DenseBase<DerivedY>& y) {
  using Scalar = typename DerivedX::Scalar;
  const auto m = pair_moments(x, y);
  const Scalar shift = m.mean_x - m.mean_y;
  const Scalar denom = m.var_x + m.var_y + shift * shift;
  if (denom == Scalar(0)) return Scalar(1);
  return std::clamp(Scalar(2) * m.cov / denom, Scalar(-1), Scalar(1));
}

// ---------------------------------------------------------------------------
// Sequence-level analytics

/// Inner join of two sequences on frame_index, keeping only pairs where both
/// samples are valid. Columns are (arousal, valence).
struct PairedSequence {
  std::string participant_id;
  std::string original_condition;
  std::string condition;
  std::vector<std::int64_t> frame_indices;
  Eigen::ArrayX2d original;
  Eigen::ArrayX2d condition_values;

  Eigen::Index size() const { return Eigen::Index(frame_indices.size()); }
};

/// Throws ValidationError when participants differ or conditions coincide.
PairedSequence align(const AffectSequence& original, const AffectSequence& condition);

struct DeviationSeries {
  std::string participant_id;
  std::string condition;
  Dimension dimension = Dimension::arousal;
  std::vector<std::int64_t> frame_indices;
  Eigen::ArrayXd original;
  Eigen::ArrayXd condition_values;
  /// condition - original; positive means overestimation.
  Eigen::ArrayXd deltas;

  Eigen::Index size() const { return deltas.size(); }
};

DeviationSeries deviation(const PairedSequence& paired, Dimension dimension);

struct TrendFrequency {
  double pos_pct = 0;
  double neg_pct = 0;
  double zero_pct = 0;
  Eigen::Index pos = 0;
  Eigen::Index neg = 0;
  Eigen::Index zero = 0;
};

/// Percentages of deltas above +tol, below -tol, and the remainder.
/// Throws ValidationError on an empty series or negative tolerance.
template <typename Derived>
TrendFrequency trend_frequency(const Eigen::DenseBase<Derived>& deltas, double zero_tolerance = 0.0) {
  if (deltas.size() == 0) throw ValidationError("trend frequency of an empty deviation series");
  if (!(zero_tolerance >= 0.0)) throw ValidationError("zero tolerance must be non-negative");
  const auto& d = detail::as_array(deltas.derived());
  TrendFrequency t;
  t.pos = (d > zero_tolerance).count();
  t.neg = (d < -zero_tolerance).count();
  t.zero = d.size() - t.pos - t.neg;
  const double n = double(d.size());
  t.pos_pct = 100.0 * double(t.pos) / n;
  t.neg_pct = 100.0 * double(t.neg) / n;
  t.zero_pct = 100.0 * double(t.zero) / n;
  return t;
}

inline TrendFrequency trend_frequency(const DeviationSeries& dev, double zero_tolerance = 0.0) {
  return trend_frequency(dev.deltas, zero_tolerance);
}

struct AgreementStats {
  double ccc = 0;
  double pearson = 0;
  bool pearson_degenerate = false;
  double pos_pct = 0;
  double neg_pct = 0;
  double zero_pct = 0;
  double mean_delta = 0;
  double min_delta = 0;
  double max_delta = 0;
  std::int64_t n = 0;
};

/// Agreement of condition against original on one dimension (n >= 2).
AgreementStats agreement(const DeviationSeries& dev, double zero_tolerance = 0.0);

/// One participant x condition x dimension cell.
struct CellResult {
  std::string participant_id;
  std::string condition;
  Dimension dimension = Dimension::arousal;
  AgreementStats stats;
};

struct TrendTriple {
  double pos_pct = 0;
  double neg_pct = 0;
  double zero_pct = 0;
};

struct ConditionSummary {
  std::string condition;
  Dimension dimension = Dimension::arousal;
  double ccc_min = 0;
  double ccc_max = 0;
  double ccc_mean = 0;
  double ccc_median = 0;
  /// (participant, ccc) in input order: the distribution-plot data.
  std::vector<std::pair<std::string, double>> distribution;
  /// Unweighted mean of per-participant percentages.
  TrendTriple trend_participant_mean;
  /// Percentages over all frames of all participants pooled.
  TrendTriple trend_pooled;
};

struct Summary {
  /// Ordered by first appearance of (condition, dimension) in the input.
  std::vector<ConditionSummary> rows;

  const ConditionSummary* find(std::string_view condition, Dimension d) const;
  std::vector<std::string> conditions() const;
};

/// Throws ValidationError on empty input.
Summary aggregate(std::span<const CellResult> cells);

/// min/max CCC per condition for both dimensions (the summary-table layout).
struct SummaryTableRow {
  std::string condition;
  std::optional<double> arousal_min_ccc;
  std::optional<double> arousal_max_ccc;
  std::optional<double> valence_min_ccc;
  std::optional<double> valence_max_ccc;

  friend bool operator==(const SummaryTableRow&, const SummaryTableRow&) = default;
};

std::vector<SummaryTableRow> summary_table(const Summary& summary);

}  // namespace affectbench
