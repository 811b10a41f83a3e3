#include "fieldseg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace fieldseg {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(int line, const std::string& msg) {
  fail(ErrorCode::kConfig, "config line " + std::to_string(line) + ": " + msg);
}

// Strips a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string scalar(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (v.empty()) config_error(line, "empty value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') config_error(line, "unterminated string");
    v = v.substr(1, v.size() - 2);
    if (v.find('"') != std::string::npos) config_error(line, "embedded quote");
  }
  return v;
}

std::vector<std::string> parse_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty() || v.front() != '[') return {scalar(v, line)};
  if (v.back() != ']') config_error(line, "unterminated array");
  std::vector<std::string> items;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const char ch = v[i];
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      items.push_back(scalar(cur, line));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty()) items.push_back(scalar(cur, line));
  return items;
}

template <typename T>
T number(const std::string& key, const std::vector<std::string>& v) {
  if (v.size() != 1) fail(ErrorCode::kConfig, key + ": expected a single value");
  T out{};
  const std::string& s = v.front();
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(ErrorCode::kConfig, key + ": not a valid number: '" + s + "'");
  return out;
}

std::string single(const std::string& key, const std::vector<std::string>& v) {
  if (v.size() != 1) fail(ErrorCode::kConfig, key + ": expected a single value");
  return v.front();
}

}  // namespace

std::map<std::string, std::vector<std::string>> parse_kv(const std::string& text) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') config_error(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) config_error(line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) config_error(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) config_error(line, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full) != 0) config_error(line, "duplicate key '" + full + "'");
    out[full] = parse_value(s.substr(eq + 1), line);
  }
  return out;
}

void apply_kv(RunConfig& c, const std::map<std::string, std::vector<std::string>>& kv) {
  using Setter = std::function<void(const std::string&, const std::vector<std::string>&)>;
  const std::map<std::string, Setter> setters{
      {"inputs", [&](auto&, auto& v) { c.inputs = v; }},
      {"labels", [&](auto& k, auto& v) { c.labels = single(k, v); }},
      {"workdir", [&](auto& k, auto& v) { c.workdir = single(k, v); }},
      {"predictions", [&](auto& k, auto& v) { c.predictions = single(k, v); }},
      {"manifest", [&](auto& k, auto& v) { c.manifest = single(k, v); }},
      {"tile_size", [&](auto& k, auto& v) { c.tile_size = number<int>(k, v); }},
      {"ratios",
       [&](auto& k, auto& v) {
         if (v.size() != 3) fail(ErrorCode::kConfig, k + ": expected [train, val, test]");
         c.ratios = {number<double>(k, {v[0]}), number<double>(k, {v[1]}), number<double>(k, {v[2]})};
       }},
      {"seed", [&](auto& k, auto& v) { c.seed = number<std::uint64_t>(k, v); }},
      {"threshold", [&](auto& k, auto& v) { c.threshold = number<float>(k, v); }},
      {"connectivity",
       [&](auto& k, auto& v) {
         try {
           c.connectivity = parse_connectivity(single(k, v));
         } catch (const Error& e) {
           fail(ErrorCode::kConfig, k + ": " + e.what());
         }
       }},
      {"iou_threshold", [&](auto& k, auto& v) { c.iou_threshold = number<double>(k, v); }},
      {"min_instance_area", [&](auto& k, auto& v) { c.min_instance_area = number<std::size_t>(k, v); }},
      {"format", [&](auto& k, auto& v) { c.format = parse_report_format(single(k, v)); }},
      {"name", [&](auto& k, auto& v) { c.name = single(k, v); }},
      {"cw.gaussian_sigma", [&](auto& k, auto& v) { c.cw.gaussian_sigma = number<double>(k, v); }},
      {"cw.canny_low", [&](auto& k, auto& v) { c.cw.canny_low = number<double>(k, v); }},
      {"cw.canny_high", [&](auto& k, auto& v) { c.cw.canny_high = number<double>(k, v); }},
      {"cw.min_field_area", [&](auto& k, auto& v) { c.cw.min_field_area = number<int>(k, v); }},
      {"cw.max_field_area", [&](auto& k, auto& v) { c.cw.max_field_area = number<int>(k, v); }},
      {"cw.homogeneity_max_std", [&](auto& k, auto& v) { c.cw.homogeneity_max_std = number<double>(k, v); }},
      {"cw.seed_min_distance", [&](auto& k, auto& v) { c.cw.seed_min_distance = number<double>(k, v); }},
  };
  for (const auto& [key, value] : kv) {
    const auto it = setters.find(key);
    if (it == setters.end()) fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
    it->second(key, value);
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig c;
  apply_kv(c, parse_kv(buf.str()));
  return c;
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "table") return ReportFormat::kTable;
  fail(ErrorCode::kConfig, "format must be 'json' or 'table', got '" + text + "'");
}

void RunConfig::validate() const {
  try {
    ratios.validate();
    cw.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  if (tile_size <= 0) fail(ErrorCode::kConfig, "tile_size must be positive");
  if (!(threshold >= 0.0F && threshold <= 1.0F)) fail(ErrorCode::kConfig, "threshold must be in [0, 1]");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorCode::kConfig, "iou_threshold must be in (0, 1]");

  std::set<std::filesystem::path> seen;
  for (const std::string* p : {&labels, &workdir, &predictions, &manifest}) {
    if (p->empty()) continue;
    const auto norm = std::filesystem::path(*p).lexically_normal();
    if (!seen.insert(norm).second) fail(ErrorCode::kConfig, "path '" + *p + "' is used for more than one role");
  }
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.threshold = threshold;
  e.iou_threshold = iou_threshold;
  e.connectivity = connectivity;
  e.min_instance_area = min_instance_area;
  e.name = name;
  return e;
}

}  // namespace fieldseg
