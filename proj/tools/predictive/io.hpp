#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "predictive/json.hpp"
#include "predictive/ogd.hpp"
#include "predictive/point.hpp"

namespace predictive::cli {

/// File-system failures; reported with the configuration exit code.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Round-trip safe, 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string format_point(const Point& p) {
  struct V {
    std::string operator()(const Label& l) const { return std::to_string(l.value); }
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(const RealVector& v) const {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
      return s;
    }
    std::string operator()(const AtomTag& t) const {
      return "tag:" + std::to_string(t.stream) + ":" + std::to_string(t.counter);
    }
  };
  return std::visit(V{}, p);
}

template <class Range>
std::string join_doubles(const Range& xs, const char* sep = ",") {
  std::string s;
  bool first = true;
  for (double x : xs) {
    if (!first) s += sep;
    s += format_double(x);
    first = false;
  }
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, const std::string& where) {
  s = trim(s);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": '" + std::string(s) + "' is not a number");
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& where) {
  s = trim(s);
  std::int64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError(where + ": '" + std::string(s) + "' is not an integer");
  return v;
}

/// Comma-separated reals, e.g. "0.25,0.5,0.75"; empty string gives an empty list.
inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

inline bool is_jsonl(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" || ext == ".json";
}

/// Non-empty lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> lines_of(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!trim(line).empty()) out.emplace_back(no, line);
  }
  return out;
}

inline Point point_from_json(const Json& j, PointKind kind, const std::string& where) {
  switch (kind) {
    case PointKind::categorical:
      if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer label");
      return Label{j.get<std::int64_t>()};
    case PointKind::real:
      if (!j.is_number()) throw ConfigError(where + ": expected a number");
      return j.get<double>();
    case PointKind::vector:
      if (!j.is_array()) throw ConfigError(where + ": expected an array");
      for (const auto& e : j)
        if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
      return j.get<RealVector>();
    case PointKind::tag:
      break;
  }
  throw ConfigError(where + ": atom-tag observations cannot be read from files");
}

/// Observations of a space of the given kind: headered CSV (one per row, vectors
/// spread over columns) or JSONL records {"x": ...}.
inline std::vector<Point> read_observations(const std::filesystem::path& path, PointKind kind) {
  const auto text = read_file(path);
  const auto lines = lines_of(text);
  std::vector<Point> out;
  if (is_jsonl(path)) {
    for (const auto& [no, line] : lines) {
      const std::string where = path.string() + ":" + std::to_string(no);
      Json j;
      try {
        j = Json::parse(line);
      } catch (const Json::exception& e) {
        throw ConfigError(where + ": malformed JSON");
      }
      if (!j.is_object() || !j.contains("x")) throw ConfigError(where + ": record without field \"x\"");
      out.push_back(point_from_json(j["x"], kind, where));
    }
    return out;
  }
  if (lines.empty()) throw ConfigError(path.string() + ": missing CSV header");
  const std::size_t width = split(lines.front().second, ',').size();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const std::string where = path.string() + ":" + std::to_string(no);
    const auto cells = split(line, ',');
    if (cells.size() != width) throw ConfigError(where + ": expected " + std::to_string(width) + " columns");
    if (kind == PointKind::vector) {
      RealVector v;
      for (auto c : cells) v.push_back(parse_double(c, where));
      out.emplace_back(std::move(v));
    } else if (width != 1) {
      throw ConfigError(where + ": scalar observations need a single column");
    } else if (kind == PointKind::categorical) {
      out.emplace_back(Label{parse_int(cells[0], where)});
    } else if (kind == PointKind::real) {
      out.emplace_back(parse_double(cells[0], where));
    } else {
      throw ConfigError(where + ": atom-tag observations cannot be read from files");
    }
  }
  return out;
}

/// (x, y) pairs: JSONL {"x": [...], "y": 0|1} or CSV with covariate columns then y.
inline std::vector<LabeledExample> read_examples(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto lines = lines_of(text);
  std::vector<LabeledExample> out;
  auto check = [&](const LabeledExample& e, const std::string& where) {
    if (e.y != 0 && e.y != 1) throw ConfigError(where + ": y must be 0 or 1");
    if (e.x.empty()) throw ConfigError(where + ": empty covariate vector");
    if (!out.empty() && out.front().x.size() != e.x.size()) throw ConfigError(where + ": covariate dimension changes");
  };
  if (is_jsonl(path)) {
    for (const auto& [no, line] : lines) {
      const std::string where = path.string() + ":" + std::to_string(no);
      LabeledExample e;
      try {
        const Json j = Json::parse(line);
        if (!j.contains("x") || !j.contains("y") || !j["y"].is_number_integer())
          throw ConfigError(where + ": record needs \"x\" and integer \"y\"");
        const auto& x = j["x"];
        if (x.is_number()) {
          e.x = {x.get<double>()};
        } else if (x.is_array()) {
          for (const auto& v : x) {
            if (!v.is_number()) throw ConfigError(where + ": covariates must be numbers");
            e.x.push_back(v.get<double>());
          }
        } else {
          throw ConfigError(where + ": covariates must be a number or an array");
        }
        e.y = j["y"].get<int>();
      } catch (const Json::exception&) {
        throw ConfigError(where + ": malformed JSON");
      }
      check(e, where);
      out.push_back(std::move(e));
    }
    return out;
  }
  if (lines.empty()) throw ConfigError(path.string() + ": missing CSV header");
  const std::size_t width = split(lines.front().second, ',').size();
  if (width < 2) throw ConfigError(path.string() + ": need covariate columns and a final y column");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [no, line] = lines[i];
    const std::string where = path.string() + ":" + std::to_string(no);
    const auto cells = split(line, ',');
    if (cells.size() != width) throw ConfigError(where + ": expected " + std::to_string(width) + " columns");
    LabeledExample e;
    for (std::size_t c = 0; c + 1 < width; ++c) e.x.push_back(parse_double(cells[c], where));
    e.y = static_cast<int>(parse_int(cells.back(), where));
    check(e, where);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace predictive::cli
