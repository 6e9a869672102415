#pragma once

#include "affectbench/affect.hpp"
#include "affectbench/frame.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace affectbench {

/// Handshake name of the newline-delimited JSON protocol.
inline constexpr std::string_view kProtocolName = "affect-predict/1";

struct PredictionRequest {
  std::int64_t id = 0;
  std::string frame_path;
  friend bool operator==(const PredictionRequest&, const PredictionRequest&) = default;
};

struct PredictionResponse {
  std::int64_t id = 0;
  std::optional<double> arousal;
  std::optional<double> valence;
  bool face_detected = false;
  friend bool operator==(const PredictionResponse&, const PredictionResponse&) = default;
};

// Wire encoding. Lines carry no trailing newline. decode_* throw ProtocolError
// for malformed JSON, missing fields, or out-of-range values.
std::string handshake_line();
void check_handshake(std::string_view line);
std::string encode_request(const PredictionRequest& request);
PredictionRequest decode_request(std::string_view line);
std::string encode_response(const PredictionResponse& response);
PredictionResponse decode_response(std::string_view line);

/// How to reach a predictor. An empty argv means the built-in mock, run
/// in-process.
struct PredictorCommand {
  std::vector<std::string> argv;
  std::chrono::milliseconds timeout{30000};
  /// Invoke once as `argv... --batch in.csv out.csv` instead of streaming.
  bool batch = false;

  static PredictorCommand builtin_mock() { return {}; }
  bool is_builtin() const { return argv.empty(); }
  std::string describe() const;
};

struct MockPrediction {
  double arousal = 0;
  double valence = 0;
};

/// Closed-form stand-in for a real model:
///   arousal = clamp(2 L / 255 - 1), valence = clamp(1 - 2 S / 128),
/// with L the mean and S the population standard deviation of the per-pixel
/// luminance (r + g + b) / 3.
MockPrediction mock_predict(const Frame& frame);

/// Serves the streaming protocol with mock_predict until `in` closes.
/// Unreadable frames answer face_detected=false.
void serve_mock(std::istream& in, std::ostream& out);

/// Batch-file flavour of serve_mock.
void serve_mock_batch(const std::filesystem::path& requests_csv, const std::filesystem::path& responses_csv);

/// A predictor session. Requests are strictly sequential; ids are assigned
/// by the session and increase monotonically from 0.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictionResponse predict(const std::string& frame_path) = 0;
  std::int64_t next_id() const noexcept { return next_id_; }

 protected:
  std::int64_t take_id() noexcept { return next_id_++; }

 private:
  std::int64_t next_id_ = 0;
};

/// Starts a session. For external commands this spawns the child and
/// validates its handshake. Not valid for batch commands.
std::unique_ptr<Predictor> open_predictor(const PredictorCommand& command);

/// One sample per frame, in order. Throws PredictorError (ProtocolError for
/// violations) naming the last good id when the predictor fails mid-stream.
AffectSequence run_predictor(Predictor& predictor, std::span<const FrameRef> frames, std::string condition);
AffectSequence run_predictor(const PredictorCommand& command, std::span<const FrameRef> frames,
                             std::string condition);

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  bool passed() const;
};

/// Exercises a predictor against the protocol: handshake, id echo over all
/// frames, value ranges, a missing-frame request (must answer, typically
/// face_detected=false), and determinism (the first frame twice).
ConformanceReport check_conformance(const PredictorCommand& command,
                                    std::span<const std::filesystem::path> frames);

}  // namespace affectbench
