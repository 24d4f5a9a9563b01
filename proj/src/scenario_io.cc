#include "cotrans/scenario_io.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cotrans/errors.h"

namespace cotrans {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

// Keys are "section.key".
using Entries = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"geometry", {"n", "N", "robot_radius", "object_radius", "k_f"}},
      {"gains", {"k_v", "k_p", "eps", "directions"}},
      {"command", {"type", "value", "amplitude", "period"}},
      {"initial", {"p_o", "v_o", "robots"}},
      {"integration", {"dt", "t_end", "seed", "hold"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Entries tokenize(const std::string& text) {
  Entries entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(line, fmt::format("line {}: unterminated section header", line));
      section = trim(s.substr(1, s.size() - 2));
      if (!schema().contains(section)) {
        throw SchemaError(section, fmt::format("line {}: unknown section [{}]", line, section));
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError(line, fmt::format("line {}: expected 'key = value'", line));
    }
    if (section.empty()) {
      throw ParseError(line, fmt::format("line {}: key outside of any section", line));
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::string full = section + "." + key;
    if (!schema().at(section).contains(key)) {
      throw SchemaError(full, fmt::format("line {}: unknown key '{}'", line, full));
    }
    if (value.empty()) {
      throw ParseError(line, fmt::format("line {}: empty value for '{}'", line, full));
    }
    if (entries.contains(full)) {
      throw SchemaError(full, fmt::format("line {}: duplicate key '{}'", line, full));
    }
    entries[full] = Entry{value, line};
  }
  return entries;
}

class Reader {
 public:
  explicit Reader(Entries entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.contains(key); }

  const Entry& require(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw SchemaError(key, fmt::format("missing required key '{}'", key));
    return it->second;
  }

  double number(const std::string& key) const {
    const Entry& e = require(key);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(e.value.c_str(), &end);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      throw ParseError(e.line, fmt::format("line {}: '{}' is not a number for '{}'", e.line,
                                           e.value, key));
    }
    return v;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) throw SchemaError(key, fmt::format("'{}' must be positive, got {}", key, v));
    return v;
  }

  double positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }

  long long integer(const std::string& key) const {
    const Entry& e = require(key);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(e.value.c_str(), &end, 10);
    if (end == e.value.c_str() || *end != '\0' || errno == ERANGE) {
      throw ParseError(e.line, fmt::format("line {}: '{}' is not an integer for '{}'", e.line,
                                           e.value, key));
    }
    return v;
  }

  nlohmann::json json(const std::string& key) const {
    const Entry& e = require(key);
    try {
      return nlohmann::json::parse(e.value);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError(e.line, fmt::format("line {}: malformed list for '{}'", e.line, key));
    }
  }

  Vec vector(const std::string& key, int dim) const {
    return to_vec(json(key), key, dim);
  }

  std::vector<Vec> vectors(const std::string& key, int dim, int count) const {
    const nlohmann::json j = json(key);
    if (!j.is_array() || static_cast<int>(j.size()) != count) {
      throw SchemaError(key, fmt::format("'{}' must be a list of {} vectors", key, count));
    }
    std::vector<Vec> out;
    for (const auto& item : j) out.push_back(to_vec(item, key, dim));
    return out;
  }

  int line(const std::string& key) const { return require(key).line; }

 private:
  static Vec to_vec(const nlohmann::json& j, const std::string& key, int dim) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
      throw SchemaError(key, fmt::format("'{}' must be a vector of length {}", key, dim));
    }
    Vec v(dim);
    for (int i = 0; i < dim; ++i) {
      if (!j[static_cast<std::size_t>(i)].is_number()) {
        throw SchemaError(key, fmt::format("'{}' entries must be numbers", key));
      }
      v(i) = j[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
  }

  Entries entries_;
};

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text, const std::string& name) {
  const Reader r(tokenize(text));
  ScenarioConfig cfg;
  cfg.name = name;

  const long long n = r.integer("geometry.n");
  if (n != 2 && n != 3) throw SchemaError("geometry.n", "'geometry.n' must be 2 or 3");
  const long long count = r.integer("geometry.N");
  if (count < 1 || count > 20) throw SchemaError("geometry.N", "'geometry.N' must lie in [1, 20]");
  cfg.n = static_cast<int>(n);
  cfg.N = static_cast<int>(count);
  cfg.geom.robot_radius = r.positive("geometry.robot_radius");
  cfg.geom.object_radius = r.positive("geometry.object_radius");
  cfg.geom.k_f = r.positive("geometry.k_f");

  cfg.gains.k_v = r.positive("gains.k_v");
  cfg.gains.k_p = r.positive("gains.k_p");
  cfg.gains.eps = r.positive("gains.eps", 0.01);
  {
    const std::string& text_dirs = r.require("gains.directions").value;
    static const std::regex evenly(R"(evenly_spaced\(\s*(\d+)\s*\))");
    std::smatch m;
    try {
      if (std::regex_match(text_dirs, m, evenly)) {
        const int k = std::stoi(m[1].str());
        if (cfg.n != 2) {
          throw SchemaError("gains.directions", "evenly_spaced(N) is only defined for n = 2");
        }
        if (k != cfg.N) {
          throw SchemaError("gains.directions",
                            fmt::format("evenly_spaced({}) does not match N = {}", k, cfg.N));
        }
        cfg.gains.dirs = DirectionSet::EvenlySpaced(k);
      } else {
        cfg.gains.dirs = DirectionSet::FromVectors(r.vectors("gains.directions", cfg.n, cfg.N));
      }
    } catch (const HardInvalid& e) {
      throw SchemaError("gains.directions", e.what());
    }
  }

  const std::string type = r.require("command.type").value;
  if (type == "zero") {
    cfg.command = CommandSignal::Zero(cfg.n);
  } else if (type == "constant") {
    cfg.command = CommandSignal::Constant(r.vector("command.value", cfg.n));
  } else if (type == "circular") {
    cfg.command = CommandSignal::Circular(cfg.n, r.number("command.amplitude", 1.0),
                                          r.positive("command.period"));
  } else {
    throw SchemaError("command.type", fmt::format("unknown command type '{}'", type));
  }
  if (type != "constant" && r.has("command.value")) {
    throw SchemaError("command.value", "'command.value' only applies to constant commands");
  }
  if (type != "circular" && (r.has("command.amplitude") || r.has("command.period"))) {
    throw SchemaError("command.amplitude", "amplitude/period only apply to circular commands");
  }

  cfg.initial_state.p_o = r.vector("initial.p_o", cfg.n);
  cfg.initial_state.v_o = r.has("initial.v_o") ? r.vector("initial.v_o", cfg.n) : Vec::Zero(cfg.n);
  const std::vector<Vec> robots = r.vectors("initial.robots", cfg.n, cfg.N);
  cfg.initial_state.robots.resize(cfg.n, cfg.N);
  for (int i = 0; i < cfg.N; ++i) cfg.initial_state.robots.col(i) = robots[static_cast<std::size_t>(i)];

  cfg.dt = r.positive("integration.dt", 1e-3);
  cfg.t_end = r.positive("integration.t_end", 60.0);
  if (cfg.t_end < cfg.dt) throw SchemaError("integration.t_end", "'integration.t_end' must be >= dt");
  if (r.has("integration.seed")) {
    const long long seed = r.integer("integration.seed");
    if (seed < 0) throw SchemaError("integration.seed", "'integration.seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (r.has("integration.hold")) {
    const std::string& hold = r.require("integration.hold").value;
    if (hold == "zoh") {
      cfg.hold = ControlHold::kZeroOrderHold;
    } else if (hold == "stage") {
      cfg.hold = ControlHold::kPerStage;
    } else {
      throw SchemaError("integration.hold", "'integration.hold' must be 'zoh' or 'stage'");
    }
  }
  return cfg;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read scenario file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.stem().string());
}

namespace {

std::string vec_text(const Vec& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    s += fmt::format("{}{:.17g}", i ? ", " : "", v(i));
  }
  return s + "]";
}

}  // namespace

std::string format_scenario(const ScenarioConfig& cfg) {
  std::string out;
  out += fmt::format("[geometry]\nn = {}\nN = {}\nrobot_radius = {:.17g}\nobject_radius = {:.17g}\n"
                     "k_f = {:.17g}\n\n",
                     cfg.n, cfg.N, cfg.geom.robot_radius, cfg.geom.object_radius, cfg.geom.k_f);
  std::string dirs = "[";
  for (int i = 0; i < cfg.gains.dirs.count(); ++i) {
    dirs += (i ? ", " : "") + vec_text(cfg.gains.dirs.direction(i));
  }
  dirs += "]";
  out += fmt::format("[gains]\nk_v = {:.17g}\nk_p = {:.17g}\neps = {:.17g}\ndirections = {}\n\n",
                     cfg.gains.k_v, cfg.gains.k_p, cfg.gains.eps, dirs);
  switch (cfg.command.kind()) {
    case CommandSignal::Kind::kZero:
      out += "[command]\ntype = zero\n\n";
      break;
    case CommandSignal::Kind::kConstant:
      out += fmt::format("[command]\ntype = constant\nvalue = {}\n\n", vec_text(cfg.command.value()));
      break;
    case CommandSignal::Kind::kCircular:
      out += fmt::format("[command]\ntype = circular\namplitude = {:.17g}\nperiod = {:.17g}\n\n",
                         cfg.command.amplitude(), cfg.command.period());
      break;
  }
  std::string robots = "[";
  for (int i = 0; i < cfg.initial_state.robot_count(); ++i) {
    robots += (i ? ", " : "") + vec_text(cfg.initial_state.robots.col(i));
  }
  robots += "]";
  out += fmt::format("[initial]\np_o = {}\nv_o = {}\nrobots = {}\n\n",
                     vec_text(cfg.initial_state.p_o), vec_text(cfg.initial_state.v_o), robots);
  out += fmt::format("[integration]\ndt = {:.17g}\nt_end = {:.17g}\nseed = {}\nhold = {}\n", cfg.dt,
                     cfg.t_end, cfg.seed,
                     cfg.hold == ControlHold::kZeroOrderHold ? "zoh" : "stage");
  return out;
}

}  // namespace cotrans
