#include "affectbench/manifest.hpp"

#include "affectbench/errors.hpp"
#include "affectbench/report_io.hpp"

#include <json.hpp>

#include <set>

namespace affectbench {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError(where + ": unknown field '" + key + "'");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + ": wrong type (got " + v.dump() + ")");
  }
}

std::int64_t get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ValidationError(where + ": expected an integer, got " + v.dump());
  return v.get<std::int64_t>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

CorruptionSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("condition must be a JSON object");
  const std::string kind_name = get_as<std::string>(require(j, "kind", "condition"), "condition.kind");
  const std::string where = "condition '" + kind_name + "'";
  reject_unknown_keys(j, {"kind", "gain", "sigma", "flip_probability", "shift", "seed"}, where);
  CorruptionSpec spec = CorruptionSpec::defaults(parse_corruption_kind(kind_name));

  auto number = [&](const char* key) { return get_as<double>(j.at(key), where + "." + key); };
  if (j.contains("gain")) {
    if (!spec.gain) throw ValidationError(where + ": parameter 'gain' does not apply");
    spec.gain = number("gain");
  }
  if (j.contains("sigma")) {
    if (!spec.sigma) throw ValidationError(where + ": parameter 'sigma' does not apply");
    spec.sigma = number("sigma");
  }
  if (j.contains("flip_probability")) {
    if (!spec.flip_probability) throw ValidationError(where + ": parameter 'flip_probability' does not apply");
    spec.flip_probability = number("flip_probability");
  }
  if (j.contains("shift")) {
    if (!spec.shift) throw ValidationError(where + ": parameter 'shift' does not apply");
    spec.shift = int(get_int(j.at("shift"), where + ".shift"));
  }
  if (j.contains("seed") && spec.kind == CorruptionKind::noise) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0)) {
      throw ValidationError(where + ": seed must be a non-negative integer");
    }
    spec.seed = j.at("seed").get<std::uint64_t>();
  }
  spec.validate();
  return spec;
}

ojson spec_to_json(const CorruptionSpec& s) {
  ojson j;
  j["kind"] = std::string(to_string(s.kind));
  if (s.gain) j["gain"] = *s.gain;
  if (s.sigma) j["sigma"] = *s.sigma;
  if (s.flip_probability) j["flip_probability"] = *s.flip_probability;
  if (s.shift) j["shift"] = *s.shift;
  if (s.kind == CorruptionKind::noise) j["seed"] = s.seed;
  return j;
}

BoundingBox bbox_from_json(const json& j, const std::string& where) {
  if (j.is_array()) {
    if (j.size() != 4) throw ValidationError(where + ": bbox array must be [x, y, w, h]");
    return {int(get_int(j[0], where)), int(get_int(j[1], where)), int(get_int(j[2], where)),
            int(get_int(j[3], where))};
  }
  if (!j.is_object()) throw ValidationError(where + ": bbox must be an object or [x, y, w, h]");
  reject_unknown_keys(j, {"x", "y", "w", "h"}, where + ".bbox");
  return {int(get_int(require(j, "x", where), where + ".x")), int(get_int(require(j, "y", where), where + ".y")),
          int(get_int(require(j, "w", where), where + ".w")), int(get_int(require(j, "h", where), where + ".h"))};
}

PredictorCommand predictor_from_json(const json& j) {
  PredictorCommand cmd;
  auto argv_from = [](const json& a) {
    if (!a.is_array() || a.empty()) throw ValidationError("predictor command must be a non-empty string array");
    std::vector<std::string> argv;
    for (const auto& s : a) argv.push_back(get_as<std::string>(s, "predictor command"));
    return argv;
  };
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s != "builtin:mock") cmd.argv = {s};
    return cmd;
  }
  if (j.is_array()) {
    cmd.argv = argv_from(j);
    return cmd;
  }
  if (!j.is_object()) throw ValidationError("predictor must be a string, an array, or an object");
  reject_unknown_keys(j, {"command", "timeout_s", "batch"}, "predictor");
  const json& c = require(j, "command", "predictor");
  if (!(c.is_string() && c.get<std::string>() == "builtin:mock")) cmd.argv = argv_from(c);
  if (j.contains("timeout_s")) {
    const double t = get_as<double>(j.at("timeout_s"), "predictor.timeout_s");
    if (!(t > 0)) throw ValidationError("predictor.timeout_s must be > 0");
    cmd.timeout = std::chrono::milliseconds(std::int64_t(t * 1000.0));
  }
  if (j.contains("batch")) cmd.batch = get_as<bool>(j.at("batch"), "predictor.batch");
  return cmd;
}

}  // namespace

std::vector<CorruptionSpec> default_conditions() {
  return {CorruptionSpec::defaults(CorruptionKind::lighter), CorruptionSpec::defaults(CorruptionKind::darker),
          CorruptionSpec::defaults(CorruptionKind::gaussian), CorruptionSpec::defaults(CorruptionKind::noise),
          CorruptionSpec::defaults(CorruptionKind::motion)};
}

CorruptionSpec parse_corruption_spec(std::string_view json_text) {
  try {
    return spec_from_json(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("condition is not valid JSON: ") + e.what());
  }
}

std::string corruption_spec_json(const CorruptionSpec& spec) { return spec_to_json(spec).dump(); }

void StudyManifest::validate() const {
  if (participants.empty()) throw ValidationError("manifest lists no participants");
  std::set<std::string> ids;
  for (const auto& p : participants) {
    const std::string where = "participant '" + p.id + "'";
    if (p.id.empty() || p.id == "." || p.id == ".." || p.id.find_first_of("/\\") != std::string::npos) {
      throw ValidationError("invalid participant id '" + p.id + "'");
    }
    if (!ids.insert(p.id).second) throw ValidationError("duplicate participant id '" + p.id + "'");
    if (p.bbox.x < 0 || p.bbox.y < 0 || p.bbox.w <= 0 || p.bbox.h <= 0) {
      throw ValidationError(where + ": bbox needs x, y >= 0 and w, h > 0");
    }
    for (std::size_t i = 0; i < p.exclude_ranges.size(); ++i) {
      const auto& r = p.exclude_ranges[i];
      if (r.first > r.last) throw ValidationError(where + ": exclude range start after end");
      if (i > 0 && r.first <= p.exclude_ranges[i - 1].last) {
        throw ValidationError(where + ": exclude ranges overlap or are out of order");
      }
    }
  }
  std::set<CorruptionKind> kinds;
  for (const auto& c : conditions) {
    c.validate();
    if (!kinds.insert(c.kind).second) throw ValidationError("duplicate condition '" + c.name() + "'");
  }
  if (!(zero_tolerance >= 0.0)) throw ValidationError("zero_tolerance must be >= 0");
  if (predictor.timeout.count() <= 0) throw ValidationError("predictor timeout must be positive");
}

StudyManifest parse_manifest(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  reject_unknown_keys(j, {"participants", "conditions", "predictor", "output_dir", "global_seed", "zero_tolerance"},
                      "manifest");

  StudyManifest m;
  const json& parts = require(j, "participants", "manifest");
  if (!parts.is_array()) throw ValidationError("manifest.participants must be an array");
  for (const auto& pj : parts) {
    if (!pj.is_object()) throw ValidationError("participant entries must be objects");
    ParticipantSpec p;
    p.id = get_as<std::string>(require(pj, "id", "participant"), "participant.id");
    const std::string where = "participant '" + p.id + "'";
    reject_unknown_keys(pj, {"id", "frames_dir", "bbox", "exclude_ranges", "index_map"}, where);
    p.frames_dir = resolve(base_dir, get_as<std::string>(require(pj, "frames_dir", where), where + ".frames_dir"));
    p.bbox = bbox_from_json(require(pj, "bbox", where), where);
    if (pj.contains("exclude_ranges")) {
      const json& ranges = pj.at("exclude_ranges");
      if (!ranges.is_array()) throw ValidationError(where + ": exclude_ranges must be an array");
      for (const auto& r : ranges) {
        if (!r.is_array() || r.size() != 2) throw ValidationError(where + ": exclude range must be [start, end]");
        p.exclude_ranges.push_back({get_int(r[0], where), get_int(r[1], where)});
      }
    }
    if (pj.contains("index_map")) {
      const json& im = pj.at("index_map");
      if (!im.is_object()) throw ValidationError(where + ": index_map must map file names to indices");
      for (const auto& [name, idx] : im.items()) p.index_map[name] = get_int(idx, where + ".index_map");
    }
    m.participants.push_back(std::move(p));
  }

  if (j.contains("conditions")) {
    const json& cj = j.at("conditions");
    if (!cj.is_array()) throw ValidationError("manifest.conditions must be an array");
    for (const auto& c : cj) m.conditions.push_back(spec_from_json(c));
  } else {
    m.conditions = default_conditions();
  }
  if (j.contains("predictor")) m.predictor = predictor_from_json(j.at("predictor"));
  if (j.contains("output_dir")) m.output_dir = resolve(base_dir, get_as<std::string>(j.at("output_dir"), "output_dir"));
  if (j.contains("global_seed")) {
    const json& s = j.at("global_seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ValidationError("global_seed must be a non-negative integer");
    }
    m.global_seed = s.get<std::uint64_t>();
  }
  if (j.contains("zero_tolerance")) m.zero_tolerance = get_as<double>(j.at("zero_tolerance"), "zero_tolerance");
  m.validate();
  return m;
}

StudyManifest load_manifest(const fs::path& path) {
  const std::string text = read_text_file(path);
  return parse_manifest(text, fs::absolute(path).parent_path());
}

std::string manifest_json(const StudyManifest& m) {
  ojson j;
  ojson parts = ojson::array();
  for (const auto& p : m.participants) {
    ojson pj;
    pj["id"] = p.id;
    pj["frames_dir"] = fs::absolute(p.frames_dir).lexically_normal().string();
    pj["bbox"] = {{"x", p.bbox.x}, {"y", p.bbox.y}, {"w", p.bbox.w}, {"h", p.bbox.h}};
    ojson ranges = ojson::array();
    for (const auto& r : p.exclude_ranges) ranges.push_back({r.first, r.last});
    pj["exclude_ranges"] = ranges;
    if (!p.index_map.empty()) pj["index_map"] = p.index_map;
    parts.push_back(pj);
  }
  j["participants"] = parts;
  ojson conds = ojson::array();
  for (const auto& c : m.conditions) conds.push_back(spec_to_json(c));
  j["conditions"] = conds;
  ojson pred;
  pred["command"] = m.predictor.is_builtin() ? ojson("builtin:mock") : ojson(m.predictor.argv);
  pred["timeout_s"] = double(m.predictor.timeout.count()) / 1000.0;
  pred["batch"] = m.predictor.batch;
  j["predictor"] = pred;
  j["output_dir"] = m.output_dir.empty() ? std::string() : fs::absolute(m.output_dir).lexically_normal().string();
  j["global_seed"] = m.global_seed;
  j["zero_tolerance"] = m.zero_tolerance;
  return j.dump(2);
}

}  // namespace affectbench
