#include "affectbench/errors.hpp"
#include "affectbench/predictor.hpp"
#include "affectbench/study.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace ab = affectbench;

namespace {

struct StudyArgs {
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  std::string conditions;
  std::size_t workers = 1;
  double zero_tolerance = 0.0;
  bool batch_mode = false;
  bool quiet = false;
};

void add_study_options(CLI::App* cmd, StudyArgs& args) {
  cmd->add_option("--manifest", args.manifest, "Study manifest (JSON)")->required();
  cmd->add_option("--out", args.out, "Output directory (overrides manifest output_dir)");
  cmd->add_option("--seed", args.seed, "Global seed (overrides manifest global_seed)");
  cmd->add_option("--conditions", args.conditions, "Comma-separated subset of lighter,darker,gaussian,noise,motion");
  cmd->add_option("--workers", args.workers, "Worker threads / predictor processes")->check(CLI::PositiveNumber);
  cmd->add_option("--zero-tolerance", args.zero_tolerance, "Deltas within +-tol count as zero")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--batch-mode", args.batch_mode, "Call the predictor once per cell with --batch in.csv out.csv");
  cmd->add_flag("-q,--quiet", args.quiet, "No progress output");
}

ab::StudyPlan make_plan(const CLI::App* cmd, const StudyArgs& args) {
  ab::StudyOverrides o;
  if (cmd->count("--out")) o.output_dir = args.out;
  if (cmd->count("--seed")) o.seed = args.seed;
  if (cmd->count("--zero-tolerance")) o.zero_tolerance = args.zero_tolerance;
  o.batch_mode = args.batch_mode;
  if (cmd->count("--conditions")) {
    std::vector<std::string> names;
    std::stringstream ss(args.conditions);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) names.push_back(item);
    }
    o.conditions = names;
  }
  return ab::ingest(ab::apply_overrides(ab::load_manifest(args.manifest), o));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corruption-robustness evaluation for frame-wise arousal/valence predictors"};
  app.set_version_flag("--version", AFFECTBENCH_VERSION);
  app.require_subcommand(1);

  StudyArgs args;
  auto* corrupt = app.add_subcommand("corrupt", "Crop frames and write every image condition");
  auto* predict = app.add_subcommand("predict", "Run the predictor over original and corrupted frames");
  auto* evaluate = app.add_subcommand("evaluate", "Agreement statistics, deviation series and reports");
  auto* report = app.add_subcommand("report", "Rebuild reports/ from existing evaluation files");
  auto* run = app.add_subcommand("run", "All stages");
  for (auto* cmd : {corrupt, predict, evaluate, report, run}) add_study_options(cmd, args);

  auto* mock = app.add_subcommand("mock-predictor", "Serve the built-in mock predictor on stdin/stdout");
  std::vector<std::string> batch_files;
  mock->add_option("--batch", batch_files, "Batch mode: <requests.csv> <responses.csv>")->expected(2);

  auto* check = app.add_subcommand("check-predictor", "Protocol conformance check for a predictor command");
  std::vector<std::string> frames;
  std::vector<std::string> command;
  double timeout_s = 30;
  check->add_option("--frame", frames, "Frame to use (repeatable)")->required()->check(CLI::ExistingFile);
  check->add_option("--timeout", timeout_s, "Per-request timeout in seconds");
  check->add_option("command", command, "Predictor command line (after --)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : int(ab::ExitCode::validation);
  }

  try {
    if (mock->parsed()) {
      if (batch_files.size() == 2) {
        ab::serve_mock_batch(batch_files[0], batch_files[1]);
      } else {
        std::ios::sync_with_stdio(false);
        ab::serve_mock(std::cin, std::cout);
      }
      return 0;
    }

    if (check->parsed()) {
      ab::PredictorCommand cmd;
      cmd.argv = command;
      cmd.timeout = std::chrono::milliseconds(std::int64_t(timeout_s * 1000));
      std::vector<std::filesystem::path> paths(frames.begin(), frames.end());
      const auto report_ = ab::check_conformance(cmd, paths);
      for (const auto& c : report_.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
      }
      return report_.passed() ? 0 : int(ab::ExitCode::predictor);
    }

    for (auto* cmd : {corrupt, predict, evaluate, report, run}) {
      if (!cmd->parsed()) continue;
      const ab::StudyPlan plan = make_plan(cmd, args);
      const ab::RunContext ctx{args.workers, args.quiet ? nullptr : &std::cerr};
      if (cmd == corrupt) ab::run_corruption_stage(plan, ctx);
      if (cmd == predict) ab::run_prediction_stage(plan, ctx);
      if (cmd == evaluate) ab::run_evaluation_stage(plan, ctx);
      if (cmd == report) ab::run_report_stage(plan, ctx);
      if (cmd == run) ab::run_study(plan, ctx);
    }
    return 0;
  } catch (const ab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(ab::ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return int(ab::ExitCode::validation);
  }
}
