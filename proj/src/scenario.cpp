#include "orlicz/scenario.hpp"

#include "orlicz/czop.hpp"
#include "orlicz/elliptic.hpp"
#include "orlicz/error.hpp"
#include "orlicz/gridfn.hpp"
#include "orlicz/oscillation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <future>
#include <sstream>

namespace orlicz {

using nlohmann::json;
namespace fs = std::filesystem;

bool RunReport::passed() const {
  return error.empty() && std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(std::move(header)); }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error(Errc::invalid_argument, "CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::size_t width_;
  std::ostringstream os_;
};

struct Context {
  const Scenario& sc;
  const json& s;
  fs::path dir;
  RunReport& rep;

  void check(const std::string& name, bool ok, const std::string& detail = "") {
    rep.assertions.push_back({name, ok, detail});
  }
  void save(const std::string& file, const Csv& csv) {
    write_atomic(dir / file, csv.str());
    rep.artifacts.push_back((fs::path(sc.id) / file).string());
  }
};

std::string label_of(const json& fn, std::size_t i) {
  if (fn.contains("label") && fn.at("label").is_string()) return fn.at("label").get<std::string>();
  return fn.at("generator").get<std::string>() + "#" + std::to_string(i);
}

GridFunction make_function(const json& fn, const Grid& g, std::uint64_t seed) {
  Params p = fn.contains("params") ? params_from_json(fn.at("params")) : Params{};
  if (!p.count("seed")) p["seed"] = static_cast<double>(seed);
  return generate(fn.at("generator").get<std::string>(), g, p);
}

std::vector<YoungFunction> phis_of(const json& s) {
  std::vector<YoungFunction> out;
  for (const auto& p : s.at("phi")) out.push_back(phi_from_json(p));
  return out;
}

// p for scale-one powers, where the Luxemburg norm is the discrete L^p norm.
std::optional<double> power_exponent(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.rfind("power(", 0) == 0) return std::stod(s.substr(6));
    return std::nullopt;
  }
  if (j.at("family") != "power" || (j.contains("scale") && j.at("scale").get<double>() != 1.0)) return std::nullopt;
  return j.contains("p") ? j.at("p").get<double>() : 2.0;
}

std::vector<int> n_list(const json& grid) {
  std::vector<int> out;
  if (grid.at("n").is_array()) {
    for (const auto& n : grid.at("n")) out.push_back(n.get<int>());
  } else {
    out.push_back(grid.at("n").get<int>());
  }
  return out;
}

Grid grid_with_n(const json& grid, int n) {
  json g = grid;
  g["n"] = n;
  return grid_from_json(g);
}

double number(const json& s, const char* key, double fallback) {
  return s.contains(key) && s.at(key).is_number() ? s.at(key).get<double>() : fallback;
}

void run_certify(Context& c) {
  Csv csv({"label", "delta2", "nabla2", "mu", "ell", "index_lower", "index_upper", "P", "R", "r", "C_r", "p", "C_p"});
  const auto& phis = c.s.at("phi");
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const YoungFunction phi = phi_from_json(phis[i]);
    const GrowthCertificate cert = certify(phi);
    std::optional<double> r, Cr, p, Cp;
    if (cert.hardy) {
      r = cert.hardy->r;
      Cr = cert.hardy->C_r;
      p = cert.hardy->p;
      Cp = cert.hardy->C_p;
    }
    const std::string pattern = std::string(cert.doubling() ? "yes" : "no") + "/" + (cert.nabla2() ? "yes" : "no");
    csv.row({phi.label(), cert.doubling() ? "yes" : "no", cert.nabla2() ? "yes" : "no", format_optional(cert.mu),
             format_optional(cert.ell), format_double(cert.index_lower), format_double(cert.index_upper),
             format_optional(cert.P), format_optional(cert.R), format_optional(r), format_optional(Cr),
             format_optional(p), format_optional(Cp)});
    bool finite = (!cert.mu || std::isfinite(*cert.mu)) && (!cert.ell || std::isfinite(*cert.ell));
    c.check("constants_finite:" + phi.label(), finite);
    if (c.s.contains("expect")) {
      const std::string want = c.s.at("expect")[i].get<std::string>();
      c.check("classification:" + phi.label(), want == pattern, "got " + pattern + ", expected " + want);
    }
  }
  c.save("certificates.csv", csv);
}

void run_norms(Context& c) {
  const Grid g = grid_from_json(c.s.at("grid"));
  const auto phis = phis_of(c.s);
  const bool oracle = c.s.value("power_oracle", false);
  const int sob = static_cast<int>(number(c.s, "sobolev_order", -1));
  Csv csv({"function", "phi", "modular", "luxemburg", "l2", "sobolev"});
  const auto& fns = c.s.at("functions");
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const GridFunction f = make_function(fns[i], g, c.sc.seed);
    const std::string label = label_of(fns[i], i);
    for (std::size_t k = 0; k < phis.size(); ++k) {
      std::optional<double> mod;
      try {
        mod = modular(f, phis[k]);
      } catch (const Error& e) {
        if (e.code() != Errc::overflow) throw;
      }
      const double lux = luxemburg_norm(f, phis[k]);
      std::optional<double> sv;
      if (sob >= 0) sv = sobolev_orlicz_norm(f, phis[k], sob);
      csv.row({label, phis[k].label(), format_optional(mod), format_double(lux), format_double(lp_norm(f, 2.0)),
               format_optional(sv)});
      c.check("luxemburg_finite:" + label + ":" + phis[k].label(), std::isfinite(lux) && lux >= 0.0);
      if (oracle) {
        if (const auto p = power_exponent(c.s.at("phi")[k])) {
          const double ref = lp_norm(f, *p);
          const double rel = ref > 0 ? std::abs(lux - ref) / ref : lux;
          c.check("power_oracle:" + label + ":" + phis[k].label(), rel <= 1e-10, "relative error " + format_double(rel));
        }
      }
    }
  }
  c.save("norms.csv", csv);
}

void run_maximal(Context& c) {
  const Grid g = grid_from_json(c.s.at("grid"));
  const auto phis = phis_of(c.s);
  const double p = number(c.s, "p", 2.0);
  OscillationOptions opt;
  opt.center_stride = static_cast<int>(number(c.s, "center_stride", 1));
  std::vector<double> R_grid;
  if (c.s.contains("vmo_R")) {
    for (const auto& r : c.s.at("vmo_R")) R_grid.push_back(r.get<double>());
  } else {
    for (double R = 2.0 * g.h(); R <= 0.25 * g.side() + 1e-12; R *= 2.0) R_grid.push_back(R);
  }
  Csv mcsv({"function", "phi", "weak11", "strong_p", "weak_orlicz", "strong_orlicz", "jensen_violations", "min_jensen_slack"});
  Csv ocsv({"function", "R", "gamma"});
  Csv bcsv({"function", "bmo", "sup_abs"});
  const auto& fns = c.s.at("functions");
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const GridFunction f = make_function(fns[i], g, c.sc.seed);
    const std::string label = label_of(fns[i], i);
    const MaximalReport mr = maximal(f);
    c.check("Mf_dominates:" + label, (mr.Mf.scalar() >= f.magnitude()).all());
    for (const auto& phi : phis) {
      const MaximalBounds mb = maximal_bounds_check(f, phi, p);
      const JensenMaximalReport jr = jensen_maximal_check(f, phi);
      mcsv.row({label, phi.label(), format_double(mb.weak11), format_double(mb.strong_p), format_double(mb.weak_orlicz),
                format_optional(mb.strong_orlicz), std::to_string(jr.violations), format_double(jr.min_slack)});
      c.check("jensen:" + label + ":" + phi.label(), jr.violations == 0, std::to_string(jr.violations) + " violations");
      c.check("weak_constants_finite:" + label + ":" + phi.label(), std::isfinite(mb.weak11) && std::isfinite(mb.weak_orlicz));
    }
    const double bmo = bmo_seminorm(f, opt);
    const double sup = f.max_abs();
    bcsv.row({label, format_double(bmo), format_double(sup)});
    c.check("bmo_le_2sup:" + label, bmo <= 2.0 * sup);
    const auto gam = vmo_modulus(f, R_grid, opt);
    bool mono = true;
    for (std::size_t k = 0; k < gam.size(); ++k) {
      ocsv.row({label, format_double(gam[k].first), format_double(gam[k].second)});
      if (k > 0 && gam[k].second < gam[k - 1].second) mono = false;
    }
    c.check("gamma_monotone:" + label, mono);
  }
  c.save("maximal.csv", mcsv);
  c.save("oscillation.csv", ocsv);
  c.save("bmo.csv", bcsv);
}

void run_operator(Context& c) {
  const json& kj = c.s.at("kernel");
  const Params kp = kj.contains("params") ? params_from_json(kj.at("params")) : Params{};
  const VCZKernel kernel = VCZKernel::by_name(kj.at("name").get<std::string>(), kp);
  const auto phis = phis_of(c.s);
  const auto ns = n_list(c.s.at("grid"));
  const bool commutator = c.s.contains("symbol");
  Csv rows({"n", "phi", "function", "ratio", "normalized_ratio", "modular_constant"});
  Csv summary({"n", "phi", "sup_ratio", "sup_function", "modular_constant", "a_bmo", "theoretical_constant"});
  std::map<std::string, std::vector<double>> constants;
  for (int n : ns) {
    const Grid g = grid_with_n(c.s.at("grid"), n);
    if (g.dim() != kernel.dim()) throw Error(Errc::invalid_argument, "kernel and grid dimensions differ");
    const PvOperator op(kernel, g);
    const auto family = test_family(g, c.sc.seed);
    std::optional<GridFunction> a;
    if (commutator) a = make_function(c.s.at("symbol"), g, c.sc.seed);
    for (const auto& phi : phis) {
      if (!certify(phi).both()) {
        c.check("certified:" + phi.label(), false, "not in Delta_2 and nabla_2");
        continue;
      }
      const OperatorNormReport r = empirical_orlicz_bound(op, phi, family, a ? &*a : nullptr, c.sc.id);
      for (std::size_t k = 0; k < r.ids.size(); ++k) {
        const std::optional<double> nr = r.normalized_ratios.empty() ? std::nullopt : std::optional<double>(r.normalized_ratios[k]);
        rows.row({std::to_string(n), phi.label(), r.ids[k], format_double(r.ratios[k]), format_optional(nr),
                  format_double(r.modular_constants[k])});
      }
      summary.row({std::to_string(n), phi.label(), format_double(r.sup_ratio), r.sup_id, format_double(r.modular_constant),
                   format_optional(r.a_bmo), format_optional(r.theoretical_constant)});
      c.check("modular_constant_finite:n" + std::to_string(n) + ":" + phi.label(), std::isfinite(r.modular_constant));
      constants[phi.label()].push_back(r.modular_constant);
      if (a && r.a_bmo && *r.a_bmo == 0.0) {
        const bool zero = std::all_of(r.ratios.begin(), r.ratios.end(), [](double v) { return v == 0.0; });
        c.check("constant_symbol_zero:n" + std::to_string(n) + ":" + phi.label(), zero);
      }
    }
  }
  if (c.s.contains("max_drift")) {
    const double tol = c.s.at("max_drift").get<double>();
    for (const auto& [label, cs] : constants) {
      for (std::size_t k = 1; k < cs.size(); ++k) {
        const double drift = std::abs(cs[k] - cs[k - 1]) / cs[k - 1];
        c.check("drift:" + label + ":n" + std::to_string(ns[k]), drift <= tol, "drift " + format_double(drift));
      }
    }
  }
  if (commutator && c.s.contains("scaling_eps")) {
    const double eps = c.s.at("scaling_eps").get<double>();
    const Grid g = grid_with_n(c.s.at("grid"), ns.front());
    const PvOperator op(kernel, g);
    const auto family = test_family(g, c.sc.seed);
    double sup[2];
    for (int k = 0; k < 2; ++k) {
      json sym = c.s.at("symbol");
      sym["params"]["amplitude"] = eps * (k + 1);
      const GridFunction a = make_function(sym, g, c.sc.seed);
      sup[k] = empirical_orlicz_bound(op, phis.front(), family, &a, c.sc.id).sup_ratio;
    }
    const double factor = sup[0] > 0 ? sup[1] / sup[0] : 0.0;
    c.check("commutator_scaling", factor >= 1.6 && factor <= 2.4, "factor " + format_double(factor));
  }
  c.save("operator_norms.csv", rows);
  c.save("operator_summary.csv", summary);
}

void run_elliptic(Context& c) {
  const json& sj = c.s.at("system");
  Params sp;
  for (const auto& [k, v] : sj.items()) {
    if (k != "family") sp[k] = v.get<double>();
  }
  const std::string family = sj.at("family").get<std::string>();
  json grid = c.s.at("grid");
  if (!grid.contains("topology")) grid["topology"] = "rectangle";
  const auto phis = phis_of(c.s);
  const auto ns = n_list(grid);
  std::vector<Ball> balls;
  for (const auto& b : c.s.at("balls")) {
    Ball ball;
    for (std::size_t d = 0; d < b.at("center").size() && d < 3; ++d) ball.center[d] = b.at("center")[d].get<double>();
    ball.radius = b.at("r").get<double>();
    balls.push_back(ball);
  }
  const double max_spread = number(c.s, "max_spread", 2.0);

  std::vector<std::string> header{"n", "phi", "ball", "r", "lhs", "rhs_f", "rhs_u", "C_emp"};
  int b2 = 0;
  Csv* est = nullptr;
  std::optional<Csv> est_csv;
  Csv cover({"n", "phi", "balls", "lhs", "rhs_f", "rhs_u", "C_emp", "max_ball_constant"});
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> by_ball;
  for (int n : ns) {
    const Grid g = grid_with_n(grid, n);
    const EllipticSystem sys = EllipticSystem::by_name(family, g, sp);
    if (!est) {
      b2 = 2 * sys.b();
      for (int s = 0; s <= b2; ++s) header.push_back("theta_" + std::to_string(s));
      header.push_back("gamma_coeff");
      est_csv.emplace(header);
      est = &*est_csv;
    }
    GridFunction u = make_function(c.s.at("u"), g, c.sc.seed);
    if (sys.m() > 1) {
      Eigen::ArrayXXd v(g.size(), sys.m());
      for (int j = 0; j < sys.m(); ++j) v.col(j) = u.scalar() * (j + 1);
      u = GridFunction(g, std::move(v));
    }
    for (const auto& phi : phis) {
      const auto reps = interior_estimate(sys, u, phi, balls);
      for (std::size_t k = 0; k < reps.size(); ++k) {
        const auto& r = reps[k];
        std::vector<std::string> row{std::to_string(n), phi.label(), std::to_string(k), format_double(r.r),
                                     format_double(r.lhs), format_double(r.rhs_f), format_double(r.rhs_u), format_double(r.C_emp)};
        for (double t : r.theta_seminorms) row.push_back(format_double(t));
        row.push_back(format_double(r.gamma_coeff));
        est->row(row);
        c.check("C_emp_finite:n" + std::to_string(n) + ":" + phi.label() + ":ball" + std::to_string(k), std::isfinite(r.C_emp));
        if (!r.vacuous) by_ball[{phi.label(), k}].push_back(r.C_emp);
      }
      if (c.s.contains("covering")) {
        const json& cv = c.s.at("covering");
        Eigen::Vector3d lo = Eigen::Vector3d::Zero(), hi = Eigen::Vector3d::Zero();
        for (int d = 0; d < g.dim(); ++d) {
          lo[d] = cv.at("lo")[d].get<double>();
          hi[d] = cv.at("hi")[d].get<double>();
        }
        const CoveringReport cr = covering_estimate(sys, u, phi, lo, hi, cv.at("r").get<double>());
        cover.row({std::to_string(n), phi.label(), std::to_string(cr.cover.size()), format_double(cr.lhs),
                   format_double(cr.rhs_f), format_double(cr.rhs_u), format_double(cr.C_emp),
                   format_double(cr.max_ball_constant)});
        c.check("covering_finite:n" + std::to_string(n) + ":" + phi.label(), std::isfinite(cr.C_emp) && cr.C_emp > 0.0);
      }
    }
  }
  for (const auto& [key, cs] : by_ball) {
    if (cs.size() < 2) continue;
    const auto [mn, mx] = std::minmax_element(cs.begin(), cs.end());
    const double spread = *mn > 0 ? *mx / *mn : INFINITY;
    c.check("spread:" + key.first + ":ball" + std::to_string(key.second), spread <= max_spread, "spread " + format_double(spread));
  }
  if (est) c.save("estimates.csv", *est);
  if (c.s.contains("covering")) c.save("covering.csv", cover);
}

}  // namespace

RunReport run_scenario(const Scenario& sc, const fs::path& out_dir) {
  RunReport rep;
  rep.id = sc.id;
  rep.task = sc.task;
  const auto t0 = std::chrono::steady_clock::now();
  Context c{sc, sc.params, out_dir / sc.id, rep};
  try {
    if (sc.task == "certify-young") {
      run_certify(c);
    } else if (sc.task == "norms") {
      run_norms(c);
    } else if (sc.task == "maximal-bmo") {
      run_maximal(c);
    } else if (sc.task == "operator-norms") {
      run_operator(c);
    } else if (sc.task == "elliptic-verify") {
      run_elliptic(c);
    } else {
      throw Error(Errc::config_parse, "unknown task " + sc.task);
    }
  } catch (const std::exception& e) {
    rep.error = e.what();
    rep.assertions.push_back({"completed", false, e.what()});
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<RunReport> run_config(const Config& config, const fs::path& out_dir, int threads) {
  threads = std::max(1, threads);
  std::vector<RunReport> reports(config.scenarios.size());
  for (std::size_t start = 0; start < config.scenarios.size(); start += threads) {
    const std::size_t stop = std::min(config.scenarios.size(), start + static_cast<std::size_t>(threads));
    if (threads == 1) {
      reports[start] = run_scenario(config.scenarios[start], out_dir);
      continue;
    }
    std::vector<std::future<RunReport>> jobs;
    for (std::size_t i = start; i < stop; ++i) {
      jobs.push_back(std::async(std::launch::async, [&, i] { return run_scenario(config.scenarios[i], out_dir); }));
    }
    for (std::size_t i = start; i < stop; ++i) reports[i] = jobs[i - start].get();
  }
  return reports;
}

void write_summary(const std::vector<RunReport>& reports, const fs::path& out_dir, const std::string& source) {
  std::ostringstream os;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  os << "config " << source << "\nfinished " << stamp << "\n\n";
  int failed = 0;
  for (const auto& r : reports) {
    failed += r.passed() ? 0 : 1;
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
    os << "[" << (r.passed() ? "PASS" : "FAIL") << "] " << r.id << " (" << r.task << ") " << wall << " s\n";
    for (const auto& a : r.assertions) {
      os << "  " << (a.passed ? "pass" : "FAIL") << "  " << a.name;
      if (!a.detail.empty()) os << "  " << a.detail;
      os << '\n';
    }
    for (const auto& f : r.artifacts) os << "  -> " << f << '\n';
  }
  os << '\n' << reports.size() - failed << "/" << reports.size() << " scenarios passed\n";
  write_atomic(out_dir / "summary.txt", os.str());
}

}  // namespace orlicz
