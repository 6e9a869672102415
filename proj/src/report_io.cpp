#include "affectbench/report_io.hpp"

#include "affectbench/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace affectbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  if (!std::isfinite(value)) throw ValidationError("cannot serialize a non-finite number");
  if (value == 0.0) value = 0.0;  // no "-0"
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quote in CSV line");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (const char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(contents.data(), std::streamsize(contents.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header, const char* what) {
  if (lines.empty() || lines.front() != header) {
    throw ValidationError(std::string(what) + ": expected header '" + std::string(header) + "'");
  }
}

std::optional<double> optional_number(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return parse_number(field);
}

std::string optional_field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

Dimension parse_dimension(std::string_view s) {
  if (s == "arousal") return Dimension::arousal;
  if (s == "valence") return Dimension::valence;
  throw ValidationError("unknown dimension '" + std::string(s) + "'");
}

}  // namespace

std::string prediction_csv(const AffectSequence& seq) {
  std::string out(kPredictionHeader);
  out += '\n';
  for (const auto& s : seq.samples) {
    out += csv_field(seq.participant_id) + ',' + csv_field(seq.condition) + ',' + std::to_string(s.frame_index) +
           ',' + optional_field(s.arousal) + ',' + optional_field(s.valence) + ',' + (s.valid ? "true" : "false") +
           '\n';
  }
  return out;
}

AffectSequence parse_prediction_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, kPredictionHeader, "prediction CSV");
  AffectSequence seq;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 6) throw ValidationError("prediction CSV line " + std::to_string(i + 1) + ": expected 6 fields");
    if (i == 1) {
      seq.participant_id = f[0];
      seq.condition = f[1];
    } else if (f[0] != seq.participant_id || f[1] != seq.condition) {
      throw ValidationError("prediction CSV mixes cells at line " + std::to_string(i + 1));
    }
    AffectSample s;
    s.frame_index = std::int64_t(parse_number(f[2]));
    s.arousal = optional_number(f[3]);
    s.valence = optional_number(f[4]);
    if (f[5] != "true" && f[5] != "false") throw ValidationError("prediction CSV: bad valid flag '" + f[5] + "'");
    s.valid = f[5] == "true";
    seq.samples.push_back(s);
  }
  seq.validate();
  return seq;
}

std::string deviation_csv(const DeviationSeries& dev) {
  std::string out(kDeviationHeader);
  out += '\n';
  for (Eigen::Index i = 0; i < dev.size(); ++i) {
    out += std::to_string(dev.frame_indices[std::size_t(i)]) + ',' + format_number(dev.original(i)) + ',' +
           format_number(dev.condition_values(i)) + ',' + format_number(dev.deltas(i)) + '\n';
  }
  return out;
}

std::string cell_json(const CellResult& c) {
  // Insertion order is the documented field order.
  nlohmann::ordered_json j;
  j["participant"] = c.participant_id;
  j["condition"] = c.condition;
  j["dimension"] = std::string(to_string(c.dimension));
  j["ccc"] = c.stats.ccc;
  j["pearson"] = c.stats.pearson;
  j["pearson_degenerate"] = c.stats.pearson_degenerate;
  j["pos_pct"] = c.stats.pos_pct;
  j["neg_pct"] = c.stats.neg_pct;
  j["zero_pct"] = c.stats.zero_pct;
  j["mean_delta"] = c.stats.mean_delta;
  j["min_delta"] = c.stats.min_delta;
  j["max_delta"] = c.stats.max_delta;
  j["n"] = c.stats.n;
  return j.dump(2) + '\n';
}

CellResult parse_cell_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    CellResult c;
    c.participant_id = j.at("participant").get<std::string>();
    c.condition = j.at("condition").get<std::string>();
    c.dimension = parse_dimension(j.at("dimension").get<std::string>());
    c.stats.ccc = j.at("ccc").get<double>();
    c.stats.pearson = j.at("pearson").get<double>();
    c.stats.pearson_degenerate = j.at("pearson_degenerate").get<bool>();
    c.stats.pos_pct = j.at("pos_pct").get<double>();
    c.stats.neg_pct = j.at("neg_pct").get<double>();
    c.stats.zero_pct = j.at("zero_pct").get<double>();
    c.stats.mean_delta = j.at("mean_delta").get<double>();
    c.stats.min_delta = j.at("min_delta").get<double>();
    c.stats.max_delta = j.at("max_delta").get<double>();
    c.stats.n = j.at("n").get<std::int64_t>();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed evaluation JSON: ") + e.what());
  }
}

std::string summary_csv(std::span<const SummaryTableRow> rows) {
  std::string out(kSummaryHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.condition) + ',' + optional_field(r.arousal_min_ccc) + ',' +
           optional_field(r.arousal_max_ccc) + ',' + optional_field(r.valence_min_ccc) + ',' +
           optional_field(r.valence_max_ccc) + '\n';
  }
  return out;
}

std::vector<SummaryTableRow> parse_summary_csv(std::string_view text) {
  const auto lines = lines_of(text);
  expect_header(lines, kSummaryHeader, "summary CSV");
  std::vector<SummaryTableRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 5) throw ValidationError("summary CSV line " + std::to_string(i + 1) + ": expected 5 fields");
    rows.push_back({f[0], optional_number(f[1]), optional_number(f[2]), optional_number(f[3]),
                    optional_number(f[4])});
  }
  return rows;
}

std::string distribution_csv(const Summary& summary) {
  std::string out(kDistributionHeader);
  out += '\n';
  for (const auto& row : summary.rows) {
    for (const auto& [participant, value] : row.distribution) {
      out += csv_field(row.condition) + ',' + std::string(to_string(row.dimension)) + ',' + csv_field(participant) +
             ',' + format_number(value) + '\n';
    }
  }
  return out;
}

std::string trend_csv(const Summary& summary) {
  std::string out(kTrendHeader);
  out += '\n';
  auto emit = [&](const ConditionSummary& row, const char* scheme, const TrendTriple& t) {
    out += csv_field(row.condition) + ',' + std::string(to_string(row.dimension)) + ',' + scheme + ',' +
           format_number(t.pos_pct) + ',' + format_number(t.neg_pct) + ',' + format_number(t.zero_pct) + '\n';
  };
  for (const auto& row : summary.rows) {
    emit(row, "participant_mean", row.trend_participant_mean);
    emit(row, "pooled_frames", row.trend_pooled);
  }
  return out;
}

}  // namespace affectbench
