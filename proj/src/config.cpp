#include "arwflow/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "arwflow/errors.hpp"

namespace arwflow {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw FlowError(ErrorKind::InvalidConfig, key + ": " + what);
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) bad(key, "expected a number, got '" + text + "'");
  if (!std::isfinite(value)) bad(key, "value must be finite");
  return value;
}

int to_int(const std::string& key, const std::string& text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    bad(key, "expected an integer, got '" + text + "'");
  }
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  bad(key, "expected true or false, got '" + text + "'");
}

std::optional<double> to_optional(const std::string& key, const std::string& text) {
  if (text == "none" || text.empty()) return std::nullopt;
  return to_double(key, text);
}

std::string optional_text(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

std::vector<InitialMode> to_modes(const std::string& key, const std::string& text) {
  std::vector<InitialMode> modes;
  if (text.empty() || text == "none") return modes;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto parts = words(item);
    if (parts.size() != 4) bad(key, "mode '" + item + "' must read 'kx ky amplitude sin|cos'");
    InitialMode m;
    m.wave = {to_int(key, parts[0]), to_int(key, parts[1])};
    m.amplitude = to_double(key, parts[2]);
    if (parts[3] == "sin") {
      m.sine = true;
    } else if (parts[3] == "cos") {
      m.sine = false;
    } else {
      bad(key, "mode kind must be sin or cos, got '" + parts[3] + "'");
    }
    modes.push_back(m);
  }
  return modes;
}

std::string modes_text(const std::vector<InitialMode>& modes) {
  if (modes.empty()) return "none";
  std::string out;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (k) out += "; ";
    out += std::to_string(modes[k].wave[0]) + " " + std::to_string(modes[k].wave[1]) + " " +
           format_number(modes[k].amplitude) + (modes[k].sine ? " sin" : " cos");
  }
  return out;
}

struct KeyHandler {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
KeyHandler number_key(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); },
          [member](const RunConfig& c) { return format_number(member(const_cast<RunConfig&>(c))); }};
}

template <class Member>
KeyHandler int_key(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_int(k, v); },
          [member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
}

const std::map<std::string, KeyHandler>& handlers() {
  static const std::map<std::string, KeyHandler> table = [] {
    std::map<std::string, KeyHandler> t;
    t["background.n"] = int_key([](RunConfig& c) -> int& { return c.background.n; });
    t["background.omega"] = number_key([](RunConfig& c) -> double& { return c.background.omega; });
    t["background.mass_m"] = number_key([](RunConfig& c) -> double& { return c.background.mass_m; });
    t["background.epsilon"] = number_key([](RunConfig& c) -> double& { return c.background.epsilon; });
    t["background.psi_mode"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          const auto parts = words(v);
          if (parts.size() != 2) bad(k, "expected two integers 'kx ky'");
          c.background.psi_mode = {to_int(k, parts[0]), to_int(k, parts[1])};
        },
        [](const RunConfig& c) {
          return std::to_string(c.background.psi_mode[0]) + " " + std::to_string(c.background.psi_mode[1]);
        }};
    t["background.p_psi"] = int_key([](RunConfig& c) -> int& { return c.background.p_psi; });
    t["background.delta"] = number_key([](RunConfig& c) -> double& { return c.background.delta; });
    t["background.p_sigma"] = int_key([](RunConfig& c) -> int& { return c.background.p_sigma; });
    t["background.a"] = number_key([](RunConfig& c) -> double& { return c.background.tau_min; });
    t["grid.points_per_axis"] = int_key([](RunConfig& c) -> int& { return c.points_per_axis; });
    t["grid.scheme"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                          if (v == "spectral") {
                            c.scheme = DerivativeScheme::Spectral;
                          } else if (v == "fd4") {
                            c.scheme = DerivativeScheme::FiniteDifference4;
                          } else {
                            bad(k, "expected spectral or fd4, got '" + v + "'");
                          }
                        },
                        [](const RunConfig& c) {
                          return std::string(c.scheme == DerivativeScheme::Spectral ? "spectral" : "fd4");
                        }};
    t["flow.curvature"] = {[](RunConfig& c, const std::string&, const std::string& v) {
                             c.curvature = parse_curvature_kind(v);
                           },
                           [](const RunConfig& c) { return std::string(to_string(c.curvature)); }};
    t["flow.t_max"] = number_key([](RunConfig& c) -> double& { return c.flow.t_max; });
    t["flow.dt_initial"] = number_key([](RunConfig& c) -> double& { return c.flow.dt_initial; });
    t["flow.dt_max"] = number_key([](RunConfig& c) -> double& { return c.flow.dt_max; });
    t["flow.safety"] = number_key([](RunConfig& c) -> double& { return c.flow.safety; });
    t["flow.spacelike_margin"] = number_key([](RunConfig& c) -> double& { return c.flow.spacelike_margin; });
    t["flow.F_min"] = number_key([](RunConfig& c) -> double& { return c.flow.F_min; });
    t["flow.output_interval"] = number_key([](RunConfig& c) -> double& { return c.flow.output_interval; });
    t["flow.stop_osc"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                            c.flow.stop_osc = to_optional(k, v);
                          },
                          [](const RunConfig& c) { return optional_text(c.flow.stop_osc); }};
    t["flow.dt_fixed"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                            c.flow.dt_fixed = to_optional(k, v);
                          },
                          [](const RunConfig& c) { return optional_text(c.flow.dt_fixed); }};
    t["flow.rescaled"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                            c.flow.rescaled = to_bool(k, v);
                          },
                          [](const RunConfig& c) { return std::string(c.flow.rescaled ? "true" : "false"); }};
    t["flow.max_halvings"] = int_key([](RunConfig& c) -> int& { return c.flow.max_halvings; });
    t["initial.u0_mean"] = number_key([](RunConfig& c) -> double& { return c.u0_mean; });
    t["initial.u0_modes"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                               c.u0_modes = to_modes(k, v);
                             },
                             [](const RunConfig& c) { return modes_text(c.u0_modes); }};
    t["output.csv_path"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.csv_path = v; },
                            [](const RunConfig& c) { return c.csv_path; }};
    t["output.json_path"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.json_path = v; },
                             [](const RunConfig& c) { return c.json_path; }};
    return t;
  }();
  return table;
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = handlers();
  const auto it = table.find(key);
  if (it == table.end()) throw FlowError(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
  it->second.set(config, key, value);
}

void validate(const RunConfig& c) {
  if (c.background.n != 1 && c.background.n != 2) bad("background.n", "must be 1 or 2");
  if (c.points_per_axis < Grid::kMinPoints) {
    bad("grid.points_per_axis", "must be at least " + std::to_string(Grid::kMinPoints));
  }
  c.flow.validate();
  if (!(c.u0_mean < 0.0)) bad("initial.u0_mean", "u must be negative everywhere, got mean " + format_number(c.u0_mean));
  double amplitude = 0.0;
  for (const auto& m : c.u0_modes) {
    if (c.background.n == 1 && m.wave[1] != 0) bad("initial.u0_modes", "ky must be 0 when n = 1");
    amplitude += std::abs(m.amplitude);
  }
  if (!(c.u0_mean + amplitude < 0.0)) {
    bad("initial.u0_modes", "u must be negative everywhere, but mean + sum |amplitude| = " +
                                format_number(c.u0_mean + amplitude));
  }
  if (c.csv_path.empty()) bad("output.csv_path", "must not be empty");
  if (c.json_path.empty()) bad("output.json_path", "must not be empty");
}

}  // namespace

std::string format_number(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, handler] : handlers()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, handler] : handlers()) out[name] = handler.get(*this);
  return out;
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& entries) {
  RunConfig config;
  for (const auto& [key, value] : entries) set_key(config, key, value);
  validate(config);
  return config;
}

Grid RunConfig::make_grid() const { return Grid(background.n, points_per_axis, scheme); }

ScalarField RunConfig::initial_height(const Grid& grid) const {
  return ScalarField::sample(grid, [&](const Point& x) {
    double u = u0_mean;
    for (const auto& m : u0_modes) {
      const double phase = m.wave[0] * x[0] + m.wave[1] * x[1];
      u += m.amplitude * (m.sine ? std::sin(phase) : std::cos(phase));
    }
    return u;
  });
}

bool operator==(const RunConfig& a, const RunConfig& b) { return a.to_map() == b.to_map(); }

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = source + ":" + std::to_string(number) + ": ";
    const auto hash = line.find('#');
    const std::string content = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) throw FlowError(ErrorKind::InvalidConfig, where + "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    if (entries.count(key)) throw FlowError(ErrorKind::InvalidConfig, where + "duplicate key '" + key + "'");
    try {
      RunConfig scratch;
      set_key(scratch, key, value);
    } catch (const FlowError& e) {
      const std::string detail = e.detail();
      const bool names_key = detail.find(key) != std::string::npos;
      throw FlowError(ErrorKind::InvalidConfig, where + (names_key ? detail : key + ": " + detail));
    }
    entries[key] = value;
  }
  try {
    return RunConfig::from_map(entries);
  } catch (const FlowError& e) {
    throw FlowError(ErrorKind::InvalidConfig, source + ": " + e.detail());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw FlowError(ErrorKind::Io, "cannot read config " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_config(buffer.str(), path.string());
}

RunConfig with_override(const RunConfig& config, const std::string& key, const std::string& value) {
  auto entries = config.to_map();
  if (!entries.count(key)) throw FlowError(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
  entries[key] = value;
  return RunConfig::from_map(entries);
}

}  // namespace arwflow
