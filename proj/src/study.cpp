#include "affectbench/study.hpp"

#include "affectbench/counter_rng.hpp"
#include "affectbench/errors.hpp"
#include "affectbench/ledger.hpp"
#include "affectbench/report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace affectbench {

namespace fs = std::filesystem;

namespace {

constexpr const char* kToolkit = "affectbench";

void log_line(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << '\n';
}

// Timestamped trace of stages that actually ran. Not part of any digest.
void sidecar(const fs::path& out, const std::string& msg) {
  std::error_code ec;
  fs::create_directories(out, ec);
  std::ofstream log(out / "run.log", std::ios::app);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << stamp << ' ' << msg << '\n';
}

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext == ".png" || ext == ".ppm";
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

void clear_subdirs(const fs::path& out, std::span<const std::string> subdirs) {
  for (const auto& s : subdirs) {
    std::error_code ec;
    fs::remove_all(out / s, ec);
    if (ec) throw IoError("cannot clear " + (out / s).string() + ": " + ec.message());
  }
}

std::vector<std::string> corruption_subdirs(const StudyPlan& plan) { return plan.condition_names(); }

const std::vector<std::string> kPredictionSubdirs = {"predictions"};
const std::vector<std::string> kEvaluationSubdirs = {"evaluation", "deviations"};
const std::vector<std::string> kReportSubdirs = {"reports"};

constexpr Dimension kDimensions[] = {Dimension::arousal, Dimension::valence};

}  // namespace

// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t index, std::size_t worker)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;

  auto body = [&](std::size_t worker) {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i, worker);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
        failed = true;
      }
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(body, w);
  }
  if (first) std::rethrow_exception(first);
}

StudyManifest apply_overrides(StudyManifest m, const StudyOverrides& o) {
  if (o.output_dir) m.output_dir = fs::absolute(*o.output_dir).lexically_normal();
  if (o.seed) m.global_seed = *o.seed;
  if (o.zero_tolerance) m.zero_tolerance = *o.zero_tolerance;
  if (o.batch_mode) m.predictor.batch = true;
  if (o.conditions) {
    std::vector<CorruptionSpec> selected;
    for (const auto& name : *o.conditions) {
      const CorruptionKind kind = parse_corruption_kind(name);
      const auto it = std::find_if(m.conditions.begin(), m.conditions.end(),
                                   [kind](const CorruptionSpec& s) { return s.kind == kind; });
      selected.push_back(it != m.conditions.end() ? *it : CorruptionSpec::defaults(kind));
    }
    m.conditions = std::move(selected);
  }
  return m;
}

std::size_t StudyPlan::frame_count() const {
  std::size_t n = 0;
  for (const auto& p : participants) n += p.frames.size();
  return n;
}

std::vector<std::string> StudyPlan::condition_names() const {
  std::vector<std::string> names{std::string(kOriginalCondition)};
  for (const auto& c : manifest.conditions) names.push_back(c.name());
  return names;
}

StudyPlan ingest(const StudyManifest& manifest) {
  manifest.validate();
  StudyPlan plan;
  plan.manifest = manifest;

  for (const auto& spec : manifest.participants) {
    const std::string where = "participant '" + spec.id + "'";
    std::error_code ec;
    if (!fs::is_directory(spec.frames_dir, ec)) {
      throw ValidationError(where + ": frames directory not found: " + spec.frames_dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(spec.frames_dir)) {
      if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
    }
    if (files.empty()) throw ValidationError(where + ": no frames in " + spec.frames_dir.string());
    std::sort(files.begin(), files.end());

    const bool numeric = std::all_of(files.begin(), files.end(),
                                     [](const fs::path& f) { return all_digits(f.stem().string()); });
    std::vector<FrameRef> refs;
    for (std::size_t i = 0; i < files.size(); ++i) {
      std::int64_t index = numeric ? std::stoll(files[i].stem().string()) : std::int64_t(i);
      if (const auto it = spec.index_map.find(files[i].filename().string()); it != spec.index_map.end()) {
        index = it->second;
      }
      if (index < 0) throw ValidationError(where + ": negative frame index for " + files[i].string());
      refs.push_back({spec.id, index, files[i]});
    }
    std::sort(refs.begin(), refs.end(), [](const FrameRef& a, const FrameRef& b) { return a.frame_index < b.frame_index; });
    for (std::size_t i = 1; i < refs.size(); ++i) {
      if (refs[i].frame_index == refs[i - 1].frame_index) {
        throw ValidationError(where + ": duplicate frame index " + std::to_string(refs[i].frame_index));
      }
    }
    std::erase_if(refs, [&](const FrameRef& r) {
      return std::any_of(spec.exclude_ranges.begin(), spec.exclude_ranges.end(),
                         [&](const IndexRange& x) { return x.contains(r.frame_index); });
    });
    if (refs.empty()) throw ValidationError(where + ": every frame is excluded");

    for (const FrameRef* probe : {&refs.front(), &refs.back()}) {
      const Frame f = load_frame(probe->source_path);
      if (!spec.bbox.fits(f.width(), f.height())) {
        throw ValidationError(where + ": bbox out of bounds for " + probe->source_path.string() + " (" +
                              std::to_string(f.width()) + "x" + std::to_string(f.height()) + ")");
      }
    }
    plan.participants.push_back({spec, std::move(refs)});
  }
  return plan;
}

std::uint64_t participant_noise_seed(std::uint64_t global_seed, const CorruptionSpec& spec,
                                     const std::string& participant_id) {
  return rng::derive_seed(rng::derive_seed(global_seed, spec.seed), rng::hash_string(participant_id));
}

// ---------------------------------------------------------------------------
// Paths

fs::path frame_output_path(const fs::path& out, const std::string& condition, const std::string& participant,
                           std::int64_t frame_index) {
  char name[32];
  std::snprintf(name, sizeof name, "%06lld.png", static_cast<long long>(frame_index));
  return out / condition / participant / name;
}

fs::path prediction_path(const fs::path& out, const std::string& participant, const std::string& condition) {
  return out / "predictions" / participant / (condition + ".csv");
}

fs::path evaluation_path(const fs::path& out, const std::string& participant, const std::string& condition,
                         Dimension d) {
  return out / "evaluation" / participant / (condition + "_" + std::string(to_string(d)) + ".json");
}

fs::path deviation_path(const fs::path& out, const std::string& participant, const std::string& condition,
                        Dimension d) {
  return out / "deviations" / participant / (condition + "_" + std::string(to_string(d)) + ".csv");
}

fs::path reports_dir(const fs::path& out) { return out / "reports"; }

// ---------------------------------------------------------------------------
// Stages

namespace {

const fs::path& output_root(const StudyManifest& m) {
  if (m.output_dir.empty()) throw ValidationError("no output directory (manifest output_dir or --out)");
  return m.output_dir;
}

}  // namespace

StageResult run_corruption_stage(const StudyPlan& plan, const RunContext& ctx) {
  const auto& m = plan.manifest;
  const fs::path& out = output_root(m);
  const auto subdirs = corruption_subdirs(plan);

  Sha256 input;
  input.update("corrupt/1\n");
  for (const auto& c : m.conditions) input.update(corruption_spec_json(c)).update("\n");
  input.update(std::to_string(m.global_seed)).update("\n");
  for (const auto& p : plan.participants) {
    const auto& b = p.spec.bbox;
    input.update(p.spec.id + " " + std::to_string(b.x) + " " + std::to_string(b.y) + " " + std::to_string(b.w) +
                 " " + std::to_string(b.h) + "\n");
    for (const auto& f : p.frames) {
      input.update(std::to_string(f.frame_index) + " ").update_file(f.source_path).update("\n");
    }
  }
  const std::string input_digest = input.hex_digest();

  RunLedger ledger(out / "ledger.json");
  if (ledger.is_current("corrupt", input_digest, tree_digest(out, subdirs))) {
    log_line(ctx, "corrupt: up to date, skipped");
    return {true, 0, {}};
  }

  clear_subdirs(out, subdirs);
  struct Unit {
    const ParticipantPlan* participant;
    const FrameRef* frame;
  };
  std::vector<Unit> units;
  for (const auto& p : plan.participants) {
    for (const auto& f : p.frames) units.push_back({&p, &f});
  }

  // Noise specs carry the participant-level seed; apply() adds the frame step.
  std::vector<std::vector<CorruptionSpec>> specs;
  for (const auto& p : plan.participants) {
    std::vector<CorruptionSpec> s = m.conditions;
    for (auto& c : s) {
      if (c.kind == CorruptionKind::noise) c.seed = participant_noise_seed(m.global_seed, c, p.spec.id);
    }
    specs.push_back(std::move(s));
  }

  std::atomic<std::size_t> written{0};
  parallel_for(units.size(), ctx.workers, [&](std::size_t i, std::size_t) {
    const Unit& u = units[i];
    const auto& pid = u.participant->spec.id;
    const std::size_t pi = std::size_t(u.participant - plan.participants.data());
    const Frame face = crop(load_frame(u.frame->source_path), u.participant->spec.bbox);
    save_frame(face, frame_output_path(out, std::string(kOriginalCondition), pid, u.frame->frame_index));
    for (const auto& spec : specs[pi]) {
      save_frame(apply(face, spec, u.frame->frame_index), frame_output_path(out, spec.name(), pid, u.frame->frame_index));
    }
    written += 1 + specs[pi].size();
  });

  ledger.record("corrupt", {input_digest, tree_digest(out, subdirs)});
  sidecar(out, "corrupt: wrote " + std::to_string(written.load()) + " frames");
  log_line(ctx, "corrupt: wrote " + std::to_string(written.load()) + " frames");
  return {false, written.load(), {}};
}

StageResult run_prediction_stage(const StudyPlan& plan, const RunContext& ctx) {
  const auto& m = plan.manifest;
  const fs::path& out = output_root(m);
  const auto conditions = plan.condition_names();

  Sha256 input;
  input.update("predict/1\n");
  input.update(tree_digest(out, corruption_subdirs(plan))).update("\n");
  input.update(m.predictor.describe()).update(m.predictor.batch ? " batch\n" : " stream\n");
  for (const auto& p : plan.participants) {
    input.update(p.spec.id);
    for (const auto& f : p.frames) input.update(" " + std::to_string(f.frame_index));
    input.update("\n");
  }
  const std::string input_digest = input.hex_digest();

  RunLedger ledger(out / "ledger.json");
  if (ledger.is_current("predict", input_digest, tree_digest(out, kPredictionSubdirs))) {
    log_line(ctx, "predict: up to date, skipped");
    return {true, 0, {}};
  }
  clear_subdirs(out, kPredictionSubdirs);

  struct Cell {
    const ParticipantPlan* participant;
    std::string condition;
  };
  std::vector<Cell> cells;
  for (const auto& p : plan.participants) {
    for (const auto& c : conditions) cells.push_back({&p, c});
  }

  const std::size_t workers = std::max<std::size_t>(1, std::min(ctx.workers, cells.size()));
  std::vector<std::unique_ptr<Predictor>> sessions(workers);
  parallel_for(cells.size(), workers, [&](std::size_t i, std::size_t w) {
    const Cell& cell = cells[i];
    const auto& pid = cell.participant->spec.id;
    std::vector<FrameRef> frames;
    for (const auto& f : cell.participant->frames) {
      frames.push_back({pid, f.frame_index, frame_output_path(out, cell.condition, pid, f.frame_index)});
    }
    AffectSequence seq;
    if (m.predictor.batch) {
      seq = run_predictor(m.predictor, frames, cell.condition);
    } else {
      if (!sessions[w]) sessions[w] = open_predictor(m.predictor);
      seq = run_predictor(*sessions[w], frames, cell.condition);
    }
    if (seq.samples.size() != frames.size()) {
      throw PredictorError("cell " + pid + "/" + cell.condition + ": " + std::to_string(seq.samples.size()) +
                           " predictions for " + std::to_string(frames.size()) + " frames");
    }
    seq.participant_id = pid;
    write_text_file(prediction_path(out, pid, cell.condition), prediction_csv(seq));
  });
  sessions.clear();

  ledger.record("predict", {input_digest, tree_digest(out, kPredictionSubdirs)});
  sidecar(out, "predict: wrote " + std::to_string(cells.size()) + " prediction files");
  log_line(ctx, "predict: wrote " + std::to_string(cells.size()) + " prediction files");
  return {false, cells.size(), {}};
}

namespace {

std::string report_parameters(const StudyPlan& plan) {
  const auto& m = plan.manifest;
  Sha256 h;
  for (const auto& c : m.conditions) h.update(corruption_spec_json(c)).update("\n");
  h.update(std::to_string(m.global_seed) + "\n" + format_number(m.zero_tolerance) + "\n" + m.predictor.describe() +
           "\n" AFFECTBENCH_VERSION "\n");
  for (const auto& p : plan.participants) h.update(p.spec.id + " " + std::to_string(p.frames.size()) + "\n");
  return h.hex_digest();
}

std::string report_json(const StudyPlan& plan, const Summary* summary, const std::vector<std::string>& warnings) {
  const auto& m = plan.manifest;
  nlohmann::ordered_json meta;
  meta["toolkit"] = kToolkit;
  meta["version"] = AFFECTBENCH_VERSION;
  meta["moments"] = "population";
  meta["ccc_form"] = "2*cov/(var_x+var_y+(mean_x-mean_y)^2)";
  meta["pairing"] = "inner join on frame_index, pairwise deletion of invalid samples";
  meta["zero_tolerance"] = m.zero_tolerance;
  meta["global_seed"] = m.global_seed;
  meta["noise_rng"] = "philox4x32-10";
  nlohmann::ordered_json conds = nlohmann::ordered_json::array();
  for (const auto& c : m.conditions) conds.push_back(nlohmann::ordered_json::parse(corruption_spec_json(c)));
  meta["conditions"] = conds;
  meta["predictor"] = m.predictor.describe();
  nlohmann::ordered_json parts = nlohmann::ordered_json::array();
  for (const auto& p : plan.participants) {
    parts.push_back({{"id", p.spec.id}, {"frames", p.frames.size()}});
  }
  meta["participants"] = parts;

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  if (summary) {
    for (const auto& r : summary->rows) {
      nlohmann::ordered_json row;
      row["condition"] = r.condition;
      row["dimension"] = std::string(to_string(r.dimension));
      row["ccc_min"] = r.ccc_min;
      row["ccc_max"] = r.ccc_max;
      row["ccc_mean"] = r.ccc_mean;
      row["ccc_median"] = r.ccc_median;
      row["participants"] = r.distribution.size();
      row["trend_participant_mean"] = {{"pos_pct", r.trend_participant_mean.pos_pct},
                                       {"neg_pct", r.trend_participant_mean.neg_pct},
                                       {"zero_pct", r.trend_participant_mean.zero_pct}};
      row["trend_pooled_frames"] = {{"pos_pct", r.trend_pooled.pos_pct},
                                    {"neg_pct", r.trend_pooled.neg_pct},
                                    {"zero_pct", r.trend_pooled.zero_pct}};
      rows.push_back(row);
    }
  }
  nlohmann::ordered_json j;
  j["metadata"] = meta;
  j["summary"] = rows;
  j["warnings"] = warnings;
  return j.dump(2) + '\n';
}

// Reads the per-cell files back and writes reports/.
StageResult write_reports(const StudyPlan& plan, const RunContext& ctx, std::vector<std::string> warnings) {
  const auto& m = plan.manifest;
  const fs::path& out = output_root(m);

  const std::string input_digest =
      sha256_hex(tree_digest(out, std::vector<std::string>{"evaluation"}) + report_parameters(plan));
  RunLedger ledger(out / "ledger.json");
  if (ledger.is_current("report", input_digest, tree_digest(out, kReportSubdirs))) {
    log_line(ctx, "report: up to date, skipped");
    return {true, 0, {}};
  }

  std::vector<CellResult> cells;
  for (const auto& p : plan.participants) {
    for (const auto& c : m.conditions) {
      for (const Dimension d : kDimensions) {
        const fs::path path = evaluation_path(out, p.spec.id, c.name(), d);
        std::error_code ec;
        if (!fs::exists(path, ec)) continue;
        cells.push_back(parse_cell_json(read_text_file(path)));
      }
    }
  }
  if (!fs::exists(out / "evaluation" / "warnings.json")) {
    throw ValidationError("no evaluation results under " + out.string() + "; run evaluate first");
  }

  // Every cell may legitimately be absent (no conditions, or all skipped).
  const Summary summary = cells.empty() ? Summary{} : aggregate(cells);
  std::vector<SummaryTableRow> table;
  for (const auto& c : m.conditions) {
    SummaryTableRow row{c.name(), {}, {}, {}, {}};
    if (const auto* a = summary.find(c.name(), Dimension::arousal)) {
      row.arousal_min_ccc = a->ccc_min;
      row.arousal_max_ccc = a->ccc_max;
    }
    if (const auto* v = summary.find(c.name(), Dimension::valence)) {
      row.valence_min_ccc = v->ccc_min;
      row.valence_max_ccc = v->ccc_max;
    }
    table.push_back(std::move(row));
  }

  clear_subdirs(out, kReportSubdirs);
  const fs::path dir = reports_dir(out);
  write_text_file(dir / "summary.csv", summary_csv(table));
  write_text_file(dir / "ccc_distribution.csv", distribution_csv(summary));
  write_text_file(dir / "trends.csv", trend_csv(summary));
  write_text_file(dir / "report.json", report_json(plan, &summary, warnings));

  ledger.record("report", {input_digest, tree_digest(out, kReportSubdirs)});
  sidecar(out, "report: wrote 4 files");
  log_line(ctx, "report: wrote summary for " + std::to_string(cells.size()) + " cells");
  return {false, 4, std::move(warnings)};
}

std::vector<std::string> read_warnings(const fs::path& out) {
  std::vector<std::string> warnings;
  const fs::path path = out / "evaluation" / "warnings.json";
  std::error_code ec;
  if (fs::exists(path, ec)) {
    for (const auto& w : nlohmann::json::parse(read_text_file(path))) warnings.push_back(w.get<std::string>());
  }
  return warnings;
}

}  // namespace

StageResult run_evaluation_stage(const StudyPlan& plan, const RunContext& ctx) {
  const auto& m = plan.manifest;
  const fs::path& out = output_root(m);

  const std::string input_digest = sha256_hex("evaluate/1\n" + tree_digest(out, kPredictionSubdirs) +
                                              report_parameters(plan));
  RunLedger ledger(out / "ledger.json");
  if (ledger.is_current("evaluate", input_digest, tree_digest(out, kEvaluationSubdirs))) {
    log_line(ctx, "evaluate: up to date, skipped");
    StageResult r = write_reports(plan, ctx, read_warnings(out));
    return r;
  }
  clear_subdirs(out, kEvaluationSubdirs);

  struct Cell {
    const ParticipantPlan* participant;
    const CorruptionSpec* condition;
  };
  std::vector<Cell> cells;
  std::vector<AffectSequence> originals;
  for (const auto& p : plan.participants) {
    const fs::path orig = prediction_path(out, p.spec.id, std::string(kOriginalCondition));
    std::error_code ec;
    if (!fs::exists(orig, ec)) {
      throw ValidationError("participant '" + p.spec.id + "': missing original prediction sequence " + orig.string());
    }
    originals.push_back(parse_prediction_csv(read_text_file(orig)));
    for (const auto& c : m.conditions) cells.push_back({&p, &c});
  }

  std::vector<std::vector<std::string>> cell_warnings(cells.size());
  std::atomic<std::size_t> written{0};
  parallel_for(cells.size(), ctx.workers, [&](std::size_t i, std::size_t) {
    const Cell& cell = cells[i];
    const auto& pid = cell.participant->spec.id;
    const std::string cond = cell.condition->name();
    const fs::path path = prediction_path(out, pid, cond);
    std::error_code ec;
    if (!fs::exists(path, ec)) {
      cell_warnings[i].push_back(pid + "/" + cond + ": no predictions, cell skipped");
      return;
    }
    const AffectSequence& original = originals[std::size_t(cell.participant - plan.participants.data())];
    AffectSequence seq = parse_prediction_csv(read_text_file(path));
    if (seq.participant_id != pid || seq.condition != cond) {
      throw ValidationError(path.string() + ": holds " + seq.participant_id + "/" + seq.condition);
    }
    const PairedSequence paired = align(original, seq);
    for (const Dimension d : kDimensions) {
      if (paired.size() < 2) {
        cell_warnings[i].push_back(pid + "/" + cond + "/" + std::string(to_string(d)) + ": only " +
                                   std::to_string(paired.size()) + " paired samples, cell skipped");
        continue;
      }
      const DeviationSeries dev = deviation(paired, d);
      const CellResult result{pid, cond, d, agreement(dev, m.zero_tolerance)};
      write_text_file(evaluation_path(out, pid, cond, d), cell_json(result));
      write_text_file(deviation_path(out, pid, cond, d), deviation_csv(dev));
      written += 2;
    }
  });

  std::vector<std::string> warnings;
  for (auto& w : cell_warnings) warnings.insert(warnings.end(), w.begin(), w.end());
  for (const auto& w : warnings) log_line(ctx, "warning: " + w);
  write_text_file(out / "evaluation" / "warnings.json", nlohmann::json(warnings).dump(2) + '\n');

  ledger.record("evaluate", {input_digest, tree_digest(out, kEvaluationSubdirs)});
  sidecar(out, "evaluate: wrote " + std::to_string(written.load()) + " files");
  log_line(ctx, "evaluate: wrote " + std::to_string(written.load()) + " files");

  StageResult r = write_reports(plan, ctx, warnings);
  r.skipped = false;
  r.files_written += written.load() + 1;
  return r;
}

StageResult run_report_stage(const StudyPlan& plan, const RunContext& ctx) {
  return write_reports(plan, ctx, read_warnings(output_root(plan.manifest)));
}

std::vector<StageResult> run_study(const StudyPlan& plan, const RunContext& ctx) {
  std::vector<StageResult> results;
  results.push_back(run_corruption_stage(plan, ctx));
  results.push_back(run_prediction_stage(plan, ctx));
  results.push_back(run_evaluation_stage(plan, ctx));
  return results;
}

}  // namespace affectbench
