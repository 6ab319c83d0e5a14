#include "elfuse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace elfuse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool try_parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  double v = 0.0;
  if (!try_parse_double(text, v) || v < 0 || v != std::floor(v) || v > 1e15) {
    throw InputError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(v);
}

void dump_value(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (v.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      out += nl;
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        out += nlohmann::ordered_json(key).dump();
        out += colon;
        dump_value(item, indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      out += nl;
      bool first = true;
      for (const auto& item : v) {
        if (!first) {
          out += ',';
          out += nl;
        }
        first = false;
        out += pad;
        dump_value(item, indent, depth + 1, out);
      }
      out += nl;
      out += close_pad;
      out += ']';
      return;
    }
    case nlohmann::ordered_json::value_t::number_float:
      out += json_number(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

}  // namespace

double parse_double(std::string_view text) {
  double v = 0.0;
  if (!try_parse_double(text, v) || !std::isfinite(v)) {
    throw InputError("not a finite number: '" + std::string(trim(text)) + "'");
  }
  return v;
}

std::vector<double> parse_column_csv(std::string_view content) {
  std::vector<double> values;
  std::size_t line_no = 0;
  bool seen_first = false;
  while (!content.empty()) {
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content = eol == std::string_view::npos ? std::string_view{} : content.substr(eol + 1);
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    line = trim(line);
    if (line.empty()) continue;
    if (line.find(',') != std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) + ": expected a single column");
    }
    const std::string_view field = unquote(line);
    double v = 0.0;
    if (try_parse_double(field, v)) {
      if (!std::isfinite(v)) throw InputError("line " + std::to_string(line_no) + ": non-finite value");
      values.push_back(v);
    } else if (!seen_first) {
      // header line
    } else {
      throw InputError("line " + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
    }
    seen_first = true;
  }
  if (values.empty()) throw InputError("no numeric values found");
  return values;
}

std::vector<double> read_column_csv(const std::filesystem::path& path) {
  try {
    return parse_column_csv(slurp(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  // snprintf honours LC_NUMERIC; force a '.' decimal separator.
  std::replace(s.begin(), s.end(), ',', '.');
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_value(value, indent, 0, out);
  return out;
}

ScenarioSpec parse_scenario_config(std::string_view content) {
  ScenarioSpec spec;
  std::string family = "normal";
  double location = 0.0;
  double scale_param = 1.0;
  std::string metric = "mse_ratio";
  std::size_t boot_b = 200;
  std::vector<double> levels = BootstrapConfig{}.levels;

  std::size_t line_no = 0;
  while (!content.empty()) {
    const auto eol = content.find('\n');
    std::string_view line = content.substr(0, eol);
    content = eol == std::string_view::npos ? std::string_view{} : content.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = unquote(trim(line.substr(eq + 1)));

    if (key == "family") {
      family = value;
    } else if (key == "location") {
      location = parse_double(value);
    } else if (key == "scale_param") {
      scale_param = parse_double(value);
    } else if (key == "n1") {
      spec.n1 = parse_count(key, value);
    } else if (key == "n2") {
      spec.n2 = parse_count(key, value);
    } else if (key == "replications") {
      spec.replications = parse_count(key, value);
    } else if (key == "equation") {
      try {
        spec.equation.variant = parse_variant(value);
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
    } else if (key == "h_exponent") {
      spec.equation.h_exponent = parse_double(value);
    } else if (key == "metric") {
      metric = value;
    } else if (key == "bootstrap_replicates") {
      boot_b = parse_count(key, value);
    } else if (key == "levels") {
      levels.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        levels.push_back(parse_double(rest.substr(0, comma)));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    } else if (key == "seed") {
      spec.seed = parse_count(key, value);
    } else {
      throw InputError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  try {
    switch (parse_family(family)) {
      case Family::Normal: spec.dist2 = DistributionSpec::normal(location, scale_param); break;
      case Family::StudentT:
        spec.dist2 = DistributionSpec::student_t(scale_param);
        spec.dist2.location = location;
        break;
      case Family::DoubleExponential:
        spec.dist2 = DistributionSpec::double_exponential(location, scale_param);
        break;
    }
  } catch (const std::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  if (metric == "mse_ratio") {
    spec.metric = Metric::MseRatio;
  } else if (metric == "coverage") {
    spec.metric = Metric::Coverage;
    BootstrapConfig boot;
    boot.replicates = boot_b;
    boot.levels = levels;
    spec.bootstrap = boot;
  } else {
    throw InputError("config: metric must be mse_ratio or coverage");
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return spec;
}

ScenarioSpec read_scenario_config(const std::filesystem::path& path) {
  return parse_scenario_config(slurp(path));
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

}  // namespace elfuse
