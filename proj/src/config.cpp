#include "orlicz/config.hpp"

#include "orlicz/czop.hpp"
#include "orlicz/elliptic.hpp"
#include "orlicz/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace orlicz {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error(Errc::config_parse, where + ": " + msg);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing key '" + key + "'");
  return obj.at(key);
}

void require_array(const json& obj, const std::string& key, const std::string& where) {
  if (!require(obj, key, where).is_array()) fail(where + "." + key, "expected an array");
}

std::string base_name(const std::string& spec) { return spec.substr(0, spec.find('(')); }

void check_generator(const json& fn, const std::string& where) {
  if (!fn.is_object()) fail(where, "expected an object with a 'generator' key");
  const json& g = require(fn, "generator", where);
  if (!g.is_string()) fail(where + ".generator", "expected a string");
  const std::string name = base_name(g.get<std::string>());
  const auto& cat = generator_catalog();
  if (std::none_of(cat.begin(), cat.end(), [&](const GeneratorInfo& i) { return i.name == name; })) {
    throw Error(Errc::unknown_generator, where + ".generator: unknown generator '" + name + "'");
  }
  if (fn.contains("params")) params_from_json(fn.at("params"));
}

void check_phis(const json& s, const std::string& where) {
  require_array(s, "phi", where);
  if (s.at("phi").empty()) fail(where + ".phi", "needs at least one entry");
  for (std::size_t i = 0; i < s.at("phi").size(); ++i) {
    try {
      phi_from_json(s.at("phi")[i]);
    } catch (const Error& e) {
      fail(where + ".phi[" + std::to_string(i) + "]", e.what());
    }
  }
}

void check_grid(const json& s, const std::string& where, bool n_list) {
  const json& g = require(s, "grid", where);
  if (!g.is_object()) fail(where + ".grid", "expected an object");
  json probe = g;
  if (n_list && g.contains("n") && g.at("n").is_array()) {
    if (g.at("n").empty()) fail(where + ".grid.n", "empty list");
    for (const auto& n : g.at("n")) {
      probe["n"] = n;
      grid_from_json(probe);
    }
  } else {
    grid_from_json(probe);
  }
}

void check_functions(const json& s, const std::string& where) {
  require_array(s, "functions", where);
  for (std::size_t i = 0; i < s.at("functions").size(); ++i) {
    check_generator(s.at("functions")[i], where + ".functions[" + std::to_string(i) + "]");
  }
}

void validate_scenario(const json& s, const std::string& where) {
  const std::string task = s.at("task").get<std::string>();
  if (task == "certify-young") {
    check_phis(s, where);
    if (s.contains("expect")) {
      require_array(s, "expect", where);
      if (s.at("expect").size() != s.at("phi").size()) fail(where + ".expect", "needs one entry per phi");
      for (const auto& e : s.at("expect")) {
        if (!e.is_string()) fail(where + ".expect", "entries are strings such as \"yes/no\"");
      }
    }
  } else if (task == "norms" || task == "maximal-bmo") {
    check_grid(s, where, false);
    check_functions(s, where);
    check_phis(s, where);
  } else if (task == "operator-norms") {
    check_grid(s, where, true);
    check_phis(s, where);
    const json& k = require(s, "kernel", where);
    if (!k.is_object() || !k.contains("name") || !k.at("name").is_string()) fail(where + ".kernel", "expected {\"name\": ...}");
    try {
      VCZKernel::by_name(k.at("name").get<std::string>(), k.contains("params") ? params_from_json(k.at("params")) : Params{});
    } catch (const Error& e) {
      fail(where + ".kernel", e.what());
    }
    if (s.contains("symbol")) check_generator(s.at("symbol"), where + ".symbol");
  } else if (task == "elliptic-verify") {
    check_grid(s, where, true);
    check_phis(s, where);
    const json& sys = require(s, "system", where);
    if (!sys.is_object() || !sys.contains("family") || !sys.at("family").is_string()) {
      fail(where + ".system", "expected {\"family\": ...}");
    }
    const auto fams = EllipticSystem::catalog();
    if (std::find(fams.begin(), fams.end(), sys.at("family").get<std::string>()) == fams.end()) {
      fail(where + ".system.family", "unknown system family");
    }
    check_generator(require(s, "u", where), where + ".u");
    require_array(s, "balls", where);
    for (std::size_t i = 0; i < s.at("balls").size(); ++i) {
      const json& b = s.at("balls")[i];
      const std::string w = where + ".balls[" + std::to_string(i) + "]";
      if (!b.is_object() || !b.contains("center") || !b.at("center").is_array() || !b.contains("r") ||
          !b.at("r").is_number()) {
        fail(w, "expected {\"center\": [..], \"r\": ..}");
      }
    }
  }
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

Params params_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::config_parse, "params: expected an object of numbers");
  Params p;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(Errc::config_parse, "params." + k + ": expected a number");
    p[k] = v.get<double>();
  }
  return p;
}

YoungFunction phi_from_json(const json& j) {
  std::string family;
  double p = 2.0, scale = 1.0;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    family = base_name(s);
    if (const auto open = s.find('('); open != std::string::npos) {
      try {
        p = std::stod(s.substr(open + 1));
      } catch (const std::exception&) {
        throw Error(Errc::config_parse, "bad parameter in '" + s + "'");
      }
    }
  } else if (j.is_object() && j.contains("family") && j.at("family").is_string()) {
    family = j.at("family").get<std::string>();
    if (j.contains("p")) {
      if (!j.at("p").is_number()) throw Error(Errc::config_parse, "p: expected a number");
      p = j.at("p").get<double>();
    }
    if (j.contains("scale")) {
      if (!j.at("scale").is_number()) throw Error(Errc::config_parse, "scale: expected a number");
      scale = j.at("scale").get<double>();
    }
  } else {
    throw Error(Errc::config_parse, "expected a Young function name or {\"family\": ...}");
  }
  if (family == "power") {
    if (!(p > 1.0)) throw Error(Errc::config_parse, "power needs p > 1");
    return YoungFunction::power(p, scale);
  }
  if (family == "exp_minus_one") return YoungFunction::exp_minus_one();
  if (family == "t_log") return YoungFunction::t_log();
  if (family == "power_log") {
    if (!(p >= 1.0)) throw Error(Errc::config_parse, "power_log needs p >= 1");
    return YoungFunction::power_log(p);
  }
  throw Error(Errc::config_parse, "unknown Young family '" + family + "'");
}

Grid grid_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::config_parse, "grid: expected an object");
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw Error(Errc::config_parse, std::string("grid.") + key + ": expected a number");
    return j.at(key).get<double>();
  };
  if (!j.contains("dim") || !j.at("dim").is_number_integer()) throw Error(Errc::config_parse, "grid.dim: expected an integer");
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw Error(Errc::config_parse, "grid.n: expected an integer");
  Topology topo = Topology::torus;
  if (j.contains("topology")) {
    const std::string t = j.at("topology").is_string() ? j.at("topology").get<std::string>() : "";
    if (t == "rectangle") {
      topo = Topology::rectangle;
    } else if (t != "torus") {
      throw Error(Errc::config_parse, "grid.topology: expected \"torus\" or \"rectangle\"");
    }
  }
  try {
    return Grid(j.at("dim").get<int>(), j.at("n").get<int>(), num("side", 1.0), topo);
  } catch (const Error& e) {
    throw Error(Errc::config_parse, std::string("grid: ") + e.what());
  }
}

Config parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config_parse, source + ": line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  Config cfg;
  cfg.source = source;
  if (!root.is_object()) fail(source, "top level must be an object");
  for (const auto& [k, v] : root.items()) {
    if (k != "seed" && k != "output_dir" && k != "scenarios" && k != "description") fail(source, "unknown key '" + k + "'");
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) fail("seed", "expected a non-negative integer");
    cfg.seed = root.at("seed").get<std::uint64_t>();
  }
  if (root.contains("output_dir")) {
    if (!root.at("output_dir").is_string()) fail("output_dir", "expected a string");
    cfg.output_dir = root.at("output_dir").get<std::string>();
  }
  require_array(root, "scenarios", source);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root.at("scenarios").size(); ++i) {
    const json& s = root.at("scenarios")[i];
    std::string where = "scenarios[" + std::to_string(i) + "]";
    if (!s.is_object()) fail(where, "expected an object");
    const json& id = require(s, "id", where);
    if (!id.is_string() || id.get<std::string>().empty()) fail(where + ".id", "expected a non-empty string");
    where = "scenario '" + id.get<std::string>() + "'";
    if (!ids.insert(id.get<std::string>()).second) fail(where, "duplicate id");
    const json& task = require(s, "task", where);
    const auto& tasks = task_names();
    if (!task.is_string() || std::find(tasks.begin(), tasks.end(), task.get<std::string>()) == tasks.end()) {
      fail(where + ".task", "expected one of certify-young, norms, maximal-bmo, operator-norms, elliptic-verify");
    }
    Scenario sc;
    sc.id = id.get<std::string>();
    sc.task = task.get<std::string>();
    sc.seed = cfg.seed;
    if (s.contains("seed")) {
      if (!s.at("seed").is_number_unsigned()) fail(where + ".seed", "expected a non-negative integer");
      sc.seed = s.at("seed").get<std::uint64_t>();
    }
    try {
      validate_scenario(s, where);
    } catch (const json::exception& e) {
      fail(where, e.what());
    }
    sc.params = s;
    cfg.scenarios.push_back(std::move(sc));
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_parse, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<CatalogEntry> builtin_catalog() {
  std::vector<CatalogEntry> out{
      {"phi", "power", "p > 1, scale = 1"},
      {"phi", "exp_minus_one", ""},
      {"phi", "t_log", ""},
      {"phi", "power_log", "p >= 1"},
      {"kernel", "hilbert", "dim = 1"},
      {"kernel", "riesz_j", "dim = 2 or 3, j = 1..dim"},
      {"kernel", "cos2theta", "dim = 2"},
      {"kernel", "variable_cos2theta", "dim = 2, eps = 0.5"},
  };
  for (const auto& g : generator_catalog()) out.push_back({"generator", g.name, g.params});
  out.push_back({"system", "laplacian", "eps = 0, lambda = 1"});
  out.push_back({"system", "anisotropic", "a11 = 1, a22 = 4, a33 = 1, eps = 0, lambda = 1"});
  out.push_back({"system", "biharmonic", "eps = 0, lambda = 1"});
  out.push_back({"system", "decoupled", "a11 = 1, a22 = 4, a33 = 1 (second component)"});
  out.push_back({"system", "coupled", "c = 0.5 (no fundamental solution)"});
  return out;
}

}  // namespace orlicz
