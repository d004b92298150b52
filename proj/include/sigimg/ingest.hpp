#pragma once

// Sequence CSV interchange, skeleton flattening and dataset manifests.
//
// Sequence CSV: a header line of signal names, then one line per time sample
// holding one decimal value per signal. LF or CRLF line endings.

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "sigimg/error.hpp"
#include "sigimg/signal.hpp"

namespace sigimg {

namespace fs = std::filesystem;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path.string() + ": read failed");
  return ss.str();
}

inline void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.string() + ": cannot create parent directory: " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": cannot rename temporary file into place");
  }
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// Parses sequence CSV text. `source` names the input in error messages.
inline SignalMatrix parse_sequence_csv(std::string_view text, const std::string& source = "<csv>",
                                       std::optional<std::size_t> expected_signals = std::nullopt) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty() || lines.front().empty()) throw ParseError(source, 1, "missing header line");

  std::vector<std::string> names;
  for (auto cell : detail::split_commas(lines.front())) {
    cell = detail::trim(cell);
    if (cell.empty()) throw ParseError(source, 1, "empty signal name in header");
    names.emplace_back(cell);
  }
  const std::size_t n = names.size();
  if (expected_signals && *expected_signals != n)
    throw ShapeError(source + ": expected " + std::to_string(*expected_signals) +
                     " signals, header has " + std::to_string(n));

  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    // A single trailing newline leaves one empty final line.
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const auto cells = detail::split_commas(lines[i]);
    if (cells.size() != n)
      throw ParseError(source, line_no,
                       "expected " + std::to_string(n) + " fields, found " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < n; ++j) {
      const auto cell = detail::trim(cells[j]);
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParseError(source, line_no, "non-numeric value '" + std::string(cell) + "'");
      if (!std::isfinite(v))
        throw ParseError(source, line_no, "non-finite value '" + std::string(cell) + "'");
      rows[j].push_back(v);
    }
  }
  if (rows.front().empty()) throw ParseError(source, 0, "no samples");
  return SignalMatrix(std::move(names), std::move(rows));
}

inline SignalMatrix load_sequence_csv(const fs::path& path,
                                      std::optional<std::size_t> expected_signals = std::nullopt) {
  return parse_sequence_csv(detail::read_file(path), path.string(), expected_signals);
}

/// Serializes with 17 significant digits so re-parsing is exact.
inline std::string format_sequence_csv(const SignalMatrix& matrix) {
  std::string out;
  for (std::size_t j = 0; j < matrix.n_signals(); ++j) {
    if (j) out += ',';
    out += matrix.name(j);
  }
  out += '\n';
  for (std::size_t t = 0; t < matrix.length(); ++t) {
    for (std::size_t j = 0; j < matrix.n_signals(); ++j) {
      if (j) out += ',';
      detail::append_double(out, matrix.at(j, t));
    }
    out += '\n';
  }
  return out;
}

inline void write_sequence_csv(const SignalMatrix& matrix, const fs::path& path) {
  detail::write_file_atomic(path, format_sequence_csv(matrix));
}

/// frames[t][joint][coord] -> one signal per (joint, coord), joint-major.
inline SignalMatrix flatten_skeleton(const std::vector<std::vector<std::vector<double>>>& frames,
                                     const std::vector<std::string>& joint_names) {
  if (frames.empty()) throw ShapeError("skeleton sequence has no frames");
  const std::size_t joints = frames.front().size();
  if (joints == 0) throw ShapeError("skeleton frame has no joints");
  const std::size_t coords = frames.front().front().size();
  if (coords != 2 && coords != 3)
    throw ShapeError("skeleton joints need 2 or 3 coordinates, got " + std::to_string(coords));
  if (joint_names.size() != joints)
    throw ShapeError("got " + std::to_string(joint_names.size()) + " joint names for " +
                     std::to_string(joints) + " joints");

  static constexpr const char* axes[] = {"x", "y", "z"};
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows(joints * coords);
  for (std::size_t j = 0; j < joints; ++j)
    for (std::size_t c = 0; c < coords; ++c) names.push_back(joint_names[j] + "." + axes[c]);
  for (auto& r : rows) r.reserve(frames.size());

  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != joints)
      throw ShapeError("frame " + std::to_string(t) + " has " + std::to_string(frames[t].size()) +
                       " joints, expected " + std::to_string(joints));
    for (std::size_t j = 0; j < joints; ++j) {
      if (frames[t][j].size() != coords)
        throw ShapeError("frame " + std::to_string(t) + " joint " + std::to_string(j) + " has " +
                         std::to_string(frames[t][j].size()) + " coordinates, expected " +
                         std::to_string(coords));
      for (std::size_t c = 0; c < coords; ++c) rows[j * coords + c].push_back(frames[t][j][c]);
    }
  }
  return SignalMatrix(std::move(names), std::move(rows));
}

/// Default joint names j0, j1, ...
inline std::vector<std::string> numbered_joints(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < count; ++j) out.push_back("j" + std::to_string(j));
  return out;
}

enum class Split { train, test };

inline const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

struct ManifestEntry {
  /// Manifest text as written (relative to the manifest directory).
  std::vector<std::string> relative_paths;
  /// Resolved against the manifest directory. More than one path means the
  /// sequences are fused (e.g. one file per performer).
  std::vector<fs::path> paths;
  ClassLabel label;
  Split split = Split::train;
  SensorDescriptor sensor;
  std::string sequence_id;
};

struct DatasetManifest {
  std::vector<std::string> label_names;
  std::vector<ManifestEntry> entries;

  std::size_t count(Split s) const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.split == s;
    return n;
  }
};

using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

inline DatasetManifest parse_manifest(const nlohmann::json& doc, const fs::path& base_dir,
                                      const std::string& source = "<manifest>",
                                      const WarningSink& warn = warn_to_stderr) {
  using nlohmann::json;
  auto fail = [&](const std::string& msg) -> Error { return Error(source + ": " + msg); };
  if (!doc.is_object()) throw fail("manifest must be a JSON object");

  static const std::set<std::string> top_fields{"label_names", "entries"};
  static const std::set<std::string> entry_fields{"path", "paths", "label", "split", "sensor",
                                                  "sequence_id"};
  static const std::set<std::string> sensor_fields{"kind", "joints", "coords", "bands"};
  for (const auto& [key, _] : doc.items())
    if (!top_fields.count(key)) warn(source + ": ignoring unknown field '" + key + "'");

  DatasetManifest manifest;
  if (!doc.contains("label_names") || !doc["label_names"].is_array())
    throw fail("missing array 'label_names'");
  std::unordered_map<std::string, std::size_t> label_index;
  for (const auto& name : doc["label_names"]) {
    if (!name.is_string()) throw fail("label_names must be strings");
    const auto s = name.get<std::string>();
    if (!label_index.emplace(s, manifest.label_names.size()).second)
      throw fail("duplicate label name '" + s + "'");
    manifest.label_names.push_back(s);
  }
  if (!doc.contains("entries") || !doc["entries"].is_array()) throw fail("missing array 'entries'");

  std::set<fs::path> seen_paths;
  std::set<std::string> seen_ids;
  std::size_t index = 0;
  for (const auto& item : doc["entries"]) {
    const std::string where = "entry " + std::to_string(index++);
    if (!item.is_object()) throw fail(where + ": must be an object");
    for (const auto& [key, _] : item.items())
      if (!entry_fields.count(key)) warn(source + ": " + where + ": ignoring unknown field '" + key + "'");

    ManifestEntry e;
    if (item.contains("path") && item["path"].is_string()) {
      e.relative_paths.push_back(item["path"].get<std::string>());
    } else if (item.contains("paths") && item["paths"].is_array() && !item["paths"].empty()) {
      for (const auto& p : item["paths"]) {
        if (!p.is_string()) throw fail(where + ": paths must be strings");
        e.relative_paths.push_back(p.get<std::string>());
      }
    } else {
      throw fail(where + ": needs 'path' (string) or 'paths' (non-empty array)");
    }
    for (const auto& rel : e.relative_paths) {
      fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : base_dir / rel;
      p = p.lexically_normal();
      if (!seen_paths.insert(p).second) throw fail(where + ": duplicate path '" + rel + "'");
      e.paths.push_back(p);
    }

    if (!item.contains("label")) throw fail(where + ": missing 'label'");
    const auto& label = item["label"];
    if (label.is_string()) {
      const auto it = label_index.find(label.get<std::string>());
      if (it == label_index.end()) {
        std::string valid;
        for (const auto& n : manifest.label_names) valid += (valid.empty() ? "" : ", ") + n;
        throw fail(where + ": unknown label '" + label.get<std::string>() + "' (valid: " + valid + ")");
      }
      e.label.index = it->second;
    } else if (label.is_number_unsigned()) {
      e.label.index = label.get<std::size_t>();
      if (e.label.index >= manifest.label_names.size())
        throw fail(where + ": label index " + std::to_string(e.label.index) + " out of range");
    } else {
      throw fail(where + ": label must be a name or a non-negative index");
    }

    const std::string split = item.value("split", std::string());
    if (split == "train") e.split = Split::train;
    else if (split == "test") e.split = Split::test;
    else throw fail(where + ": unknown split '" + split + "' (expected train or test)");

    if (item.contains("sensor")) {
      const auto& s = item["sensor"];
      if (!s.is_object()) throw fail(where + ": sensor must be an object");
      for (const auto& [key, _] : s.items())
        if (!sensor_fields.count(key))
          warn(source + ": " + where + ": ignoring unknown sensor field '" + key + "'");
      try {
        e.sensor.kind = sensor_kind_from_string(s.value("kind", std::string("generic")));
      } catch (const Error& err) {
        throw fail(where + ": " + err.what());
      }
      e.sensor.joints = s.value("joints", std::size_t{0});
      e.sensor.coords = s.value("coords", std::size_t{0});
      e.sensor.bands = s.value("bands", std::size_t{0});
    }

    e.sequence_id = item.value("sequence_id", std::string());
    if (e.sequence_id.empty()) e.sequence_id = fs::path(e.relative_paths.front()).stem().string();
    if (!seen_ids.insert(e.sequence_id).second)
      throw fail(where + ": duplicate sequence_id '" + e.sequence_id + "'");
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

inline DatasetManifest load_manifest(const fs::path& path, const WarningSink& warn = warn_to_stderr) {
  const auto text = detail::read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return parse_manifest(doc, path.parent_path(), path.string(), warn);
}

inline nlohmann::json manifest_to_json(const DatasetManifest& manifest) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    nlohmann::json item;
    if (e.relative_paths.size() == 1) item["path"] = e.relative_paths.front();
    else item["paths"] = e.relative_paths;
    item["label"] = manifest.label_names.at(e.label.index);
    item["split"] = to_string(e.split);
    nlohmann::json sensor{{"kind", to_string(e.sensor.kind)}};
    if (e.sensor.joints) sensor["joints"] = e.sensor.joints;
    if (e.sensor.coords) sensor["coords"] = e.sensor.coords;
    if (e.sensor.bands) sensor["bands"] = e.sensor.bands;
    item["sensor"] = sensor;
    item["sequence_id"] = e.sequence_id;
    entries.push_back(std::move(item));
  }
  return {{"label_names", manifest.label_names}, {"entries", entries}};
}

inline void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  detail::write_file_atomic(path, manifest_to_json(manifest).dump(2) + "\n");
}

}  // namespace sigimg
