#include "run_config.hpp"

#include "spoc/error.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace spoc::cli {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct Key {
  std::string name;
  std::string help;
  Setter set;
};

double to_double(const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected a number, got '" + v + "'");
  return x;
}

int to_int(const std::string& v) {
  int x = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t\""));
    item.erase(item.find_last_not_of(" \t\"") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"study.name", "case1, case2, rotating, sweep or custom", nullptr},
      {"study.rotating", "include Earth rotation", [](RunConfig& c, const std::string& v) { c.study_config.rotating = to_bool(v); }},
      {"study.control_limits", "enforce sigma_min and alpha_max",
       [](RunConfig& c, const std::string& v) { c.study_config.control_limits = to_bool(v); }},
      {"study.tf_guess", "final-time guess of a cold start, s",
       [](RunConfig& c, const std::string& v) { c.study_config.tf_guess = to_double(v); }},
      {"limits.heat_rate_max", "MW/m^2", [](RunConfig& c, const std::string& v) { c.study_config.heat_rate_max = to_double(v) * 1e6; }},
      {"limits.dynamic_pressure_max", "kPa",
       [](RunConfig& c, const std::string& v) { c.study_config.dynamic_pressure_max = to_double(v) * 1e3; }},
      {"limits.load_factor_max", "g", [](RunConfig& c, const std::string& v) { c.study_config.load_factor_max = to_double(v); }},
      {"limits.sigma_min", "deg", [](RunConfig& c, const std::string& v) { c.study_config.sigma_min_deg = to_double(v); }},
      {"limits.alpha_max", "deg", [](RunConfig& c, const std::string& v) { c.study_config.alpha_max_deg = to_double(v); }},
      {"sweep.heat_rate_values", "comma-separated heating-rate limits, MW/m^2",
       [](RunConfig& c, const std::string& v) {
         c.sweep_values.clear();
         for (const auto& s : to_list(v)) c.sweep_values.push_back(to_double(s));
         if (c.sweep_values.empty()) throw std::invalid_argument("empty list");
       }},
      {"mesh.intervals", "initial number of intervals K", [](RunConfig& c, const std::string& v) { c.settings.intervals = to_int(v); }},
      {"mesh.degree", "initial collocation degree N_k", [](RunConfig& c, const std::string& v) { c.settings.degree = to_int(v); }},
      {"mesh.min_degree", "degree of split intervals", [](RunConfig& c, const std::string& v) { c.settings.spoc.min_degree = to_int(v); }},
      {"mesh.max_degree", "degree cap before splitting", [](RunConfig& c, const std::string& v) { c.settings.spoc.max_degree = to_int(v); }},
      {"mesh.extra_degree", "extra degree of the error-estimate rule",
       [](RunConfig& c, const std::string& v) { c.settings.spoc.extra_degree = to_int(v); }},
      {"mesh.max_iterations", "mesh iteration cap", [](RunConfig& c, const std::string& v) { c.settings.spoc.max_iterations = to_int(v); }},
      {"tolerances.nlp", "NLP tolerance", [](RunConfig& c, const std::string& v) { c.settings.spoc.nlp.tolerance = to_double(v); }},
      {"tolerances.mesh", "epsilon_mesh", [](RunConfig& c, const std::string& v) { c.settings.spoc.mesh_tolerance = to_double(v); }},
      {"tolerances.constraint", "epsilon_c", [](RunConfig& c, const std::string& v) { c.settings.spoc.constraint_tolerance = to_double(v); }},
      {"tolerances.heat_rate_detection", "epsilon_1",
       [](RunConfig& c, const std::string& v) { c.study_config.heat_rate_tolerance = to_double(v); }},
      {"tolerances.dynamic_pressure_detection", "epsilon_2",
       [](RunConfig& c, const std::string& v) { c.study_config.dynamic_pressure_tolerance = to_double(v); }},
      {"tolerances.heat_rate_width", "nu_1", [](RunConfig& c, const std::string& v) { c.study_config.heat_rate_width = to_double(v); }},
      {"tolerances.dynamic_pressure_width", "nu_2",
       [](RunConfig& c, const std::string& v) { c.study_config.dynamic_pressure_width = to_double(v); }},
      {"solver.backend", "NLP backend", [](RunConfig& c, const std::string& v) { c.settings.spoc.nlp.backend = v; }},
      {"solver.max_iterations", "NLP iteration cap per solve",
       [](RunConfig& c, const std::string& v) { c.settings.spoc.nlp.max_iterations = to_int(v); }},
      {"solver.print_level", "0 silent, 1 summary, 2 per iteration",
       [](RunConfig& c, const std::string& v) { c.settings.spoc.nlp.print_level = to_int(v); }},
      {"solver.mu_init", "initial barrier parameter", [](RunConfig& c, const std::string& v) { c.settings.spoc.nlp.mu_init = to_double(v); }},
      {"output.dir", "output directory", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      {"output.formats", "csv, json or both", [](RunConfig& c, const std::string& v) {
         c.write_csv = c.write_json = false;
         for (const auto& f : to_list(v)) {
           if (f == "csv")
             c.write_csv = true;
           else if (f == "json")
             c.write_json = true;
           else
             throw std::invalid_argument("unknown format '" + f + "'");
         }
       }},
      {"output.warm_start", "trajectory CSV used as the initial guess",
       [](RunConfig& c, const std::string& v) { c.warm_start = v; }},
  };
  return k;
}

const Key& find_key(const std::string& key) {
  const auto& k = keys();
  const auto exact = std::find_if(k.begin(), k.end(), [&](const Key& e) { return e.name == key; });
  if (exact != k.end()) return *exact;
  const Key* match = nullptr;
  for (const auto& e : k)
    if (e.name.size() > key.size() && e.name.compare(e.name.size() - key.size(), key.size(), key) == 0 &&
        e.name[e.name.size() - key.size() - 1] == '.') {
      if (match) throw Error(ErrorCode::Config, "ambiguous field '" + key + "'");
      match = &e;
    }
  if (!match) throw Error(ErrorCode::Config, "unknown field '" + key + "'");
  return *match;
}

struct FileEntry {
  std::string key;
  std::string value;
  int line;
};

/// Line of the first non-comment occurrence of `name` as a key, or 0.
int line_of(const std::vector<std::string>& lines, const std::string& name) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto first = l.find_first_not_of(" \t");
    if (first == std::string::npos || l[first] == '#' || l[first] == ';') continue;
    if (l.compare(first, name.size(), name) == 0) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::vector<FileEntry> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::vector<std::string> lines;
  {
    std::stringstream ss(buffer.str());
    std::string l;
    while (std::getline(ss, l)) lines.push_back(l);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto first = l.find_first_not_of(" \t\r");
    if (first == std::string::npos || l[first] == '#' || l[first] == ';' || l[first] == '[') continue;
    if (l.find('=') == std::string::npos)
      throw Error(ErrorCode::Config, path + ":" + std::to_string(i + 1) + ": expected 'key = value'");
  }
  std::vector<CLI::ConfigItem> items;
  try {
    std::stringstream ss(buffer.str());
    items = CLI::ConfigINI().from_config(ss);
  } catch (const CLI::Error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
  std::vector<FileEntry> out;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    out.push_back({item.fullname(), value, line_of(lines, item.name)});
  }
  return out;
}

/// what() without the error-code prefix.
std::string message_of(const Error& e) {
  const std::string w = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return w.compare(0, prefix.size(), prefix) == 0 ? w.substr(prefix.size()) : w;
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const std::vector<std::pair<std::string, std::string>> out = [] {
    std::vector<std::pair<std::string, std::string>> v;
    for (const auto& k : keys()) v.emplace_back(k.name, k.help);
    return v;
  }();
  return out;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::Config, "override '" + text + "' is not of the form key=value");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const Key& k = find_key(key);
  if (!k.set) throw Error(ErrorCode::Config, "field '" + k.name + "' cannot be changed here");
  try {
    k.set(config, value);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::Config, "field '" + k.name + "': " + e.what());
  }
}

RunConfig load_run_config(const std::optional<std::string>& study, const std::optional<std::string>& config_path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<FileEntry> entries;
  if (config_path) entries = read_file(*config_path);

  RunConfig c;
  c.study = "case1";
  for (const auto& e : entries)
    if (e.key == "study.name" || e.key == "name") c.study = e.value;
  if (study) c.study = *study;

  const std::string base = c.study == "sweep" ? "rotating" : c.study == "custom" ? "case1" : c.study;
  try {
    c.study_config = rlve::preset(base);
  } catch (const Error&) {
    throw Error(ErrorCode::Config, "field 'study.name': unknown study '" + c.study + "'");
  }
  c.study_config.name = c.study;

  for (const auto& e : entries) {
    if (e.key == "study.name" || e.key == "name") continue;
    try {
      apply_setting(c, e.key, e.value);
    } catch (const Error& err) {
      throw Error(ErrorCode::Config, *config_path + ":" + std::to_string(e.line) + ": " + message_of(err));
    }
  }
  for (const auto& [key, value] : overrides) {
    if (key == "study.name" || key == "name")
      throw Error(ErrorCode::Config, "use --study to select the study");
    apply_setting(c, key, value);
  }
  return c;
}

}  // namespace spoc::cli
