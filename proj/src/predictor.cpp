#include "affectbench/predictor.hpp"

#include "affectbench/errors.hpp"
#include "affectbench/process.hpp"
#include "affectbench/report_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <unistd.h>

namespace affectbench {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Wire format

std::string handshake_line() { return json{{"protocol", kProtocolName}}.dump(); }

void check_handshake(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (j.is_object() && j.contains("protocol") && j["protocol"].is_string() &&
        j["protocol"].get<std::string>() == kProtocolName) {
      return;
    }
  } catch (const json::exception&) {
  }
  throw ProtocolError("bad handshake, expected {\"protocol\": \"" + std::string(kProtocolName) + "\"}, got: " +
                      std::string(line.substr(0, 200)));
}

std::string encode_request(const PredictionRequest& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["frame_path"] = r.frame_path;
  return j.dump();
}

PredictionRequest decode_request(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() || !j.contains("frame_path") ||
        !j["frame_path"].is_string()) {
      throw ProtocolError("malformed request: " + std::string(line.substr(0, 200)));
    }
    return {j["id"].get<std::int64_t>(), j["frame_path"].get<std::string>()};
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed request: ") + e.what());
  }
}

std::string encode_response(const PredictionResponse& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["arousal"] = r.arousal ? json(*r.arousal) : json(nullptr);
  j["valence"] = r.valence ? json(*r.valence) : json(nullptr);
  j["face_detected"] = r.face_detected;
  return j.dump();
}

PredictionResponse decode_response(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError("malformed response line: " + std::string(line.substr(0, 200)));
  }
  if (!j.is_object()) throw ProtocolError("response is not a JSON object");
  if (!j.contains("id") || !j["id"].is_number_integer()) throw ProtocolError("response without integer id");
  if (!j.contains("face_detected") || !j["face_detected"].is_boolean()) {
    throw ProtocolError("response without boolean face_detected");
  }
  PredictionResponse r;
  r.id = j["id"].get<std::int64_t>();
  r.face_detected = j["face_detected"].get<bool>();
  if (!r.face_detected) return r;  // values, if any, carry no meaning

  for (const char* key : {"arousal", "valence"}) {
    if (!j.contains(key) || !j[key].is_number()) {
      throw ProtocolError("response " + std::to_string(r.id) + ": missing numeric " + key);
    }
    const double v = j[key].get<double>();
    if (!std::isfinite(v) || !in_affect_range(v)) {
      throw ProtocolError("response " + std::to_string(r.id) + ": " + key + " = " + j[key].dump() +
                          " outside [-1, 1]");
    }
    (std::string_view(key) == "arousal" ? r.arousal : r.valence) = v;
  }
  return r;
}

std::string PredictorCommand::describe() const {
  if (is_builtin()) return "builtin:mock";
  std::string s;
  for (const auto& a : argv) s += (s.empty() ? "" : " ") + a;
  return s;
}

// ---------------------------------------------------------------------------
// Mock predictor

MockPrediction mock_predict(const Frame& frame) {
  const Eigen::ArrayXd lum = frame.pixels().cast<double>().rowwise().sum() / 3.0;
  const double mean = lum.mean();
  const double sd = std::sqrt((lum - mean).square().mean());
  return {std::clamp(2.0 * mean / 255.0 - 1.0, -1.0, 1.0), std::clamp(1.0 - 2.0 * sd / 128.0, -1.0, 1.0)};
}

namespace {

PredictionResponse mock_response(std::int64_t id, const std::string& frame_path) {
  try {
    const auto p = mock_predict(load_frame(frame_path));
    return {id, p.arousal, p.valence, true};
  } catch (const Error& e) {
    std::cerr << "mock predictor: " << e.what() << '\n';
    return {id, std::nullopt, std::nullopt, false};
  }
}

}  // namespace

void serve_mock(std::istream& in, std::ostream& out) {
  out << handshake_line() << '\n' << std::flush;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    PredictionRequest req;
    try {
      req = decode_request(line);
    } catch (const ProtocolError& e) {
      std::cerr << "mock predictor: " << e.what() << '\n';
      continue;
    }
    out << encode_response(mock_response(req.id, req.frame_path)) << '\n' << std::flush;
  }
}

namespace {
constexpr std::string_view kBatchRequestHeader = "id,frame_path";
constexpr std::string_view kBatchResponseHeader = "id,arousal,valence,face_detected";
}  // namespace

void serve_mock_batch(const fs::path& requests_csv, const fs::path& responses_csv) {
  const std::string text = read_text_file(requests_csv);
  std::string out(kBatchResponseHeader);
  out += '\n';
  bool header = true;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (header) {
      if (line != kBatchRequestHeader) throw ValidationError("batch requests: bad header");
      header = false;
      continue;
    }
    if (f.size() != 2) throw ValidationError("batch requests: expected id,frame_path");
    const auto r = mock_response(std::int64_t(parse_number(f[0])), f[1]);
    out += std::to_string(r.id) + ',' + (r.arousal ? format_number(*r.arousal) : "") + ',' +
           (r.valence ? format_number(*r.valence) : "") + ',' + (r.face_detected ? "true" : "false") + '\n';
  }
  write_text_file(responses_csv, out);
}

// ---------------------------------------------------------------------------
// Sessions

namespace {

class MockPredictor final : public Predictor {
 public:
  PredictionResponse predict(const std::string& frame_path) override {
    return mock_response(take_id(), frame_path);
  }
};

class ProcessPredictor final : public Predictor {
 public:
  explicit ProcessPredictor(const PredictorCommand& command)
      : command_(command), child_(command.argv) {
    std::string line;
    switch (child_.read_line(line, command_.timeout)) {
      case ChildProcess::ReadStatus::line: check_handshake(line); break;
      case ChildProcess::ReadStatus::eof:
        throw PredictorError("predictor '" + command_.describe() + "' exited before the handshake");
      case ChildProcess::ReadStatus::timeout:
        throw PredictorError("predictor '" + command_.describe() + "' sent no handshake within timeout");
    }
  }

  PredictionResponse predict(const std::string& frame_path) override {
    const std::int64_t id = take_id();
    if (!child_.write_line(encode_request({id, frame_path}))) {
      throw PredictorError("predictor closed its input before request " + std::to_string(id));
    }
    std::string line;
    switch (child_.read_line(line, command_.timeout)) {
      case ChildProcess::ReadStatus::line: break;
      case ChildProcess::ReadStatus::eof:
        throw PredictorError("predictor exited while serving request " + std::to_string(id));
      case ChildProcess::ReadStatus::timeout:
        throw PredictorError("predictor timed out on request " + std::to_string(id) + " after " +
                             std::to_string(command_.timeout.count()) + " ms");
    }
    PredictionResponse r = decode_response(line);
    if (r.id != id) {
      throw ProtocolError("unknown id " + std::to_string(r.id) + " in response to request " + std::to_string(id));
    }
    return r;
  }

 private:
  PredictorCommand command_;
  ChildProcess child_;
};

[[noreturn]] void rethrow_with_context(const PredictorError& e, const std::string& context) {
  if (dynamic_cast<const ProtocolError*>(&e)) throw ProtocolError(context + ": " + e.what());
  throw PredictorError(context + ": " + e.what());
}

std::string last_good(std::optional<std::int64_t> id) {
  return id ? "last good id " + std::to_string(*id) : "no successful response";
}

void check_frames(std::span<const FrameRef> frames) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].participant_id != frames[0].participant_id) {
      throw ValidationError("run_predictor: frames from more than one participant");
    }
    if (frames[i].frame_index <= frames[i - 1].frame_index) {
      throw ValidationError("run_predictor: frame indices must strictly increase");
    }
  }
}

AffectSample to_sample(std::int64_t frame_index, const PredictionResponse& r) {
  if (!r.face_detected) return AffectSample::invalid(frame_index);
  return AffectSample::make(frame_index, r.arousal, r.valence);
}

AffectSequence run_batch(const PredictorCommand& command, std::span<const FrameRef> frames, std::string condition) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("affectbench-batch-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{dir};

  const fs::path in = dir / "requests.csv";
  const fs::path out = dir / "responses.csv";
  std::string req(kBatchRequestHeader);
  req += '\n';
  for (std::size_t i = 0; i < frames.size(); ++i) {
    req += std::to_string(i) + ',' + csv_field(frames[i].source_path.string()) + '\n';
  }
  write_text_file(in, req);

  if (command.is_builtin()) {
    serve_mock_batch(in, out);
  } else {
    std::vector<std::string> argv = command.argv;
    argv.insert(argv.end(), {"--batch", in.string(), out.string()});
    ChildProcess child(argv);
    child.close_stdin();
    const auto budget = command.timeout * std::int64_t(frames.size() + 1);
    const auto status = child.wait_for(budget);
    if (!status) {
      child.kill();
      throw PredictorError("batch predictor timed out after " + std::to_string(budget.count()) + " ms");
    }
    if (*status != 0) throw PredictorError("batch predictor exited with status " + std::to_string(*status));
  }

  std::string text;
  try {
    text = read_text_file(out);
  } catch (const IoError&) {
    throw ProtocolError("batch predictor wrote no response file");
  }
  std::map<std::int64_t, PredictionResponse> responses;
  bool header = true;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != kBatchResponseHeader) throw ProtocolError("batch responses: bad header '" + line + "'");
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 4 || (f[3] != "true" && f[3] != "false")) {
      throw ProtocolError("batch responses: malformed line '" + line + "'");
    }
    // Reuse the streaming validation rules.
    json j{{"id", std::int64_t(parse_number(f[0]))}, {"face_detected", f[3] == "true"}};
    j["arousal"] = f[1].empty() ? json(nullptr) : json(parse_number(f[1]));
    j["valence"] = f[2].empty() ? json(nullptr) : json(parse_number(f[2]));
    const auto r = decode_response(j.dump());
    if (r.id < 0 || r.id >= std::int64_t(frames.size())) throw ProtocolError("batch responses: unknown id " + f[0]);
    if (!responses.emplace(r.id, r).second) throw ProtocolError("batch responses: duplicate id " + f[0]);
  }
  if (responses.size() != frames.size()) {
    throw PredictorError("batch predictor answered " + std::to_string(responses.size()) + " of " +
                         std::to_string(frames.size()) + " requests");
  }

  AffectSequence seq{frames.empty() ? std::string() : frames[0].participant_id, std::move(condition), {}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    seq.samples.push_back(to_sample(frames[i].frame_index, responses.at(std::int64_t(i))));
  }
  return seq;
}

}  // namespace

std::unique_ptr<Predictor> open_predictor(const PredictorCommand& command) {
  if (command.is_builtin()) return std::make_unique<MockPredictor>();
  if (command.batch) throw ValidationError("batch-mode predictors have no streaming session");
  return std::make_unique<ProcessPredictor>(command);
}

AffectSequence run_predictor(Predictor& predictor, std::span<const FrameRef> frames, std::string condition) {
  check_frames(frames);
  AffectSequence seq{frames.empty() ? std::string() : frames[0].participant_id, std::move(condition), {}};
  seq.samples.reserve(frames.size());
  std::optional<std::int64_t> good;
  for (const auto& f : frames) {
    PredictionResponse r;
    try {
      r = predictor.predict(f.source_path.string());
    } catch (const PredictorError& e) {
      rethrow_with_context(e, seq.participant_id + "/" + seq.condition + " (" + last_good(good) + ")");
    }
    good = r.id;
    seq.samples.push_back(to_sample(f.frame_index, r));
  }
  return seq;
}

AffectSequence run_predictor(const PredictorCommand& command, std::span<const FrameRef> frames,
                             std::string condition) {
  if (frames.empty()) return {std::string(), std::move(condition), {}};
  if (command.batch) {
    check_frames(frames);
    return run_batch(command, frames, std::move(condition));
  }
  auto session = open_predictor(command);
  return run_predictor(*session, frames, std::move(condition));
}

// ---------------------------------------------------------------------------
// Conformance

bool ConformanceReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

ConformanceReport check_conformance(const PredictorCommand& command, std::span<const fs::path> frames) {
  ConformanceReport report;
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };
  if (command.batch) {
    add("streaming", false, "conformance checks need a streaming predictor");
    return report;
  }

  std::unique_ptr<Predictor> session;
  auto reopen = [&]() -> bool {
    try {
      session = open_predictor(command);
      return true;
    } catch (const Error& e) {
      session.reset();
      return false;
    }
  };

  try {
    session = open_predictor(command);
    add("handshake", true, std::string(kProtocolName));
  } catch (const Error& e) {
    add("handshake", false, e.what());
    return report;
  }

  // Id echo and range checks are enforced by the session on every response.
  std::size_t valid = 0;
  try {
    for (const auto& f : frames) {
      if (session->predict(f.string()).face_detected) ++valid;
    }
    add("id_bijection", true, std::to_string(frames.size()) + " requests echoed");
    add("value_range", true, std::to_string(valid) + " valid responses within [-1, 1]");
  } catch (const ProtocolError& e) {
    add("id_bijection", std::string_view(e.what()).find("unknown id") == std::string_view::npos, e.what());
    add("value_range", false, e.what());
    if (!reopen()) return report;
  } catch (const Error& e) {
    add("id_bijection", false, e.what());
    add("value_range", false, e.what());
    if (!reopen()) return report;
  }

  try {
    const auto r = session->predict((fs::temp_directory_path() / "affectbench-no-such-frame.png").string());
    add("invalid_face", !r.face_detected,
        r.face_detected ? "unreadable frame reported as a detected face" : "face_detected=false");
  } catch (const Error& e) {
    add("invalid_face", false, e.what());
    if (!reopen()) return report;
  }

  if (frames.empty()) {
    add("determinism", false, "no frames supplied");
  } else {
    try {
      const auto a = session->predict(frames[0].string());
      const auto b = session->predict(frames[0].string());
      const bool same = a.face_detected == b.face_detected && a.arousal == b.arousal && a.valence == b.valence;
      add("determinism", same, same ? "identical outputs" : "outputs differ for the same frame");
    } catch (const Error& e) {
      add("determinism", false, e.what());
    }
  }
  return report;
}

}  // namespace affectbench
