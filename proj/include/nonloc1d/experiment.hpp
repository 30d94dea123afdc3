#ifndef NONLOC1D_EXPERIMENT_HPP
#define NONLOC1D_EXPERIMENT_HPP

#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "nonloc1d/forms.hpp"
#include "nonloc1d/setgeom.hpp"
#include "nonloc1d/spectral.hpp"

namespace nonloc1d {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// One batch run: everything needed to reproduce it lives in one JSON file.
struct ExperimentConfig {
  std::string kind;
  json raw;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

inline const std::vector<std::pair<const char*, const char*>>&
experiment_catalog() {
  static const std::vector<std::pair<const char*, const char*>> kCatalog = {
      {"kernel-check", "verify a claimed ellipticity record by sampling"},
      {"layer", "solve the increasing profile connecting -1 and +1"},
      {"ground", "solve the even positive decaying profile"},
      {"nondegeneracy", "bottom-spectrum certificate for a solved profile"},
      {"quotient", "boundedness/constancy certificate for a quotient"},
      {"maxprinciple", "exterior sign-propagation check"},
      {"caccioppoli", "quotient-identity forms and premise-coupled verdict"},
      {"scaling", "cross-region integral scaling exponents"},
      {"set-identities", "randomized check of the region identities"},
  };
  return kCatalog;
}

namespace expdetail {

inline double require_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    throw ConfigError("missing or non-numeric field '" + field + "'");
  return j[field].get<double>();
}

inline std::string require_string(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_string())
    throw ConfigError("missing or non-string field '" + field + "'");
  return j[field].get<std::string>();
}

inline Kernel parse_kernel(const json& cfg) {
  if (!cfg.contains("kernel")) throw ConfigError("missing field 'kernel'");
  try {
    return Kernel::from_json(cfg["kernel"]);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

inline Grid1D parse_grid(const json& cfg) {
  const json g = cfg.value("grid", json::object());
  const double X = g.value("X", 40.0);
  const double h = g.value("h", 0.01);
  try {
    return Grid1D::make(X, h);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

inline OperatorScheme parse_scheme(const json& cfg) {
  OperatorScheme s;
  const json g = cfg.value("grid", json::object());
  s.delta = g.value("delta", 0.0);
  return s;
}

inline SolverConfig parse_solver(const json& cfg) {
  SolverConfig s;
  const json j = cfg.value("solver", json::object());
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  s.residual_target = j.value("residual_target", s.residual_target);
  s.initial_guess = j.value("initial_guess", s.initial_guess);
  s.guess_amplitude = j.value("guess_amplitude", s.guess_amplitude);
  s.tail_refit_passes = j.value("tail_refit_passes", s.tail_refit_passes);
  if (j.contains("continuation"))
    s.continuation = j["continuation"].get<std::vector<double>>();
  if (!(s.residual_target > 0.0))
    throw ConfigError("solver.residual_target must be positive");
  return s;
}

inline CertificateTolerances parse_tolerances(const json& cfg) {
  CertificateTolerances t;
  const json j = cfg.value("tolerances", json::object());
  t.lambda1_tol = j.value("lambda1", t.lambda1_tol);
  t.cosine_min = j.value("cosine_min", t.cosine_min);
  t.gap_multiplier = j.value("gap_multiplier", t.gap_multiplier);
  t.gap_floor = j.value("gap_floor", t.gap_floor);
  t.quotient_osc_cap = j.value("quotient_osc_cap", t.quotient_osc_cap);
  for (double v : {t.lambda1_tol, t.cosine_min, t.gap_floor})
    if (!(v > 0.0)) throw ConfigError("tolerances must be positive");
  return t;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

inline void write_result(const std::filesystem::path& dir, const json& result) {
  write_text(dir / "result.json", result.dump(2) + "\n");
}

inline void write_pairs_csv(const std::filesystem::path& p,
                            const std::string& header,
                            const std::vector<std::pair<double, double>>& rows) {
  std::ofstream out(p);
  out << header << "\n";
  char buf[80];
  for (const auto& [a, b] : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", a, b);
    out << buf;
  }
}

inline int status_from_verdict(const std::string& v) {
  if (v == "PASS") return 0;
  if (v == "HYPOTHESES-NOT-MET") return 2;
  return 1;
}

// Closed forms used by the built-in oracle comparisons.
inline double layer_half_closed(double x) {
  return (2.0 / std::numbers::pi) * std::atan(x);
}
inline double ground_half_closed(double x) { return 2.0 / (1.0 + x * x); }

inline bool is_half_order_normalized(const Kernel& k) {
  return k.kind() == KernelKind::fractional && k.normalized() &&
         std::abs(k.order_lower() - 0.5) < 1e-12;
}

// ---------------------------------------------------------------------------
// Runners, one per experiment kind. Each returns the exit status and fills
// result.json plus any CSV side outputs.

inline int run_kernel_check(const ExperimentConfig& cfg,
                            const std::filesystem::path& dir) {
  const Kernel k = parse_kernel(cfg.raw);
  if (!cfg.raw.contains("claim")) throw ConfigError("missing field 'claim'");
  const json jc = cfg.raw["claim"];
  const std::string kind = require_string(jc, "kind");
  EllipticityClaim claim;
  if (kind == "two-sided")
    claim = EllipticityTwoSided{require_number(jc, "lambda"),
                                require_number(jc, "Lambda"),
                                require_number(jc, "s")};
  else if (kind == "upper")
    claim = EllipticityUpper{require_number(jc, "Lambda1"),
                             require_number(jc, "Lambda2"),
                             require_number(jc, "s_lower"),
                             require_number(jc, "s_upper")};
  else
    throw ConfigError("claim.kind must be 'two-sided' or 'upper'");
  const int per_decade = cfg.raw.value("samples_per_decade", 200);
  const BoundReport rep = verify_kernel_bounds(k, claim, per_decade);
  json result = {{"kind", cfg.kind},
                 {"verdict", rep.pass ? "PASS" : "FAIL"},
                 {"report", rep.to_json()}};
  write_result(dir, result);
  return rep.pass ? 0 : 1;
}

inline int run_profile_solve(const ExperimentConfig& cfg,
                             const std::filesystem::path& dir, bool ground) {
  const Kernel k = parse_kernel(cfg.raw);
  const Grid1D g = parse_grid(cfg.raw);
  const OperatorScheme scheme = parse_scheme(cfg.raw);
  const SolverConfig solver = parse_solver(cfg.raw);
  const NonlinearitySpec f =
      make_nonlinearity(cfg.raw.value("nonlinearity", ground ? "quadratic" : "sin"));
  const SolveResult sol = ground ? solve_ground_state(k, f, g, solver, scheme)
                                 : solve_layer(k, f, g, solver, scheme);

  write_csv(sol.u, (dir / "solution.csv").string());
  write_text(dir / "solution.meta.json", sidecar_json(sol.u).dump(2) + "\n");

  json result = {{"kind", cfg.kind},
                 {"convergence", sol.report.to_json()},
                 {"grid", {{"X", g.X}, {"h", g.h}, {"delta", scheme.resolved_delta(g.h)}}}};

  bool pass = sol.report.converged && !sol.report.has_flag("TRIVIAL-LIMIT") &&
              !sol.report.has_flag("DEGENERATE");
  // Closed-form comparison for the half-order canonical problems.
  if (is_half_order_normalized(k) &&
      ((ground && f.name == "quadratic") || (!ground && f.name == "sin"))) {
    double err = 0.0;
    for (int i = 0; i < g.size(); ++i) {
      const double x = g.node(i);
      if (std::abs(x) > 20.0) continue;
      const double ref = ground ? ground_half_closed(x) : layer_half_closed(x);
      err = std::max(err, std::abs(sol.u[i] - ref));
    }
    result["oracle_sup_error"] = err;
    result["oracle_tolerance"] = 1e-3;
    pass = pass && err < 1e-3;
  }
  result["verdict"] = pass ? "PASS" : "FAIL";
  write_result(dir, result);
  return pass ? 0 : 1;
}

inline int run_nondegeneracy(const ExperimentConfig& cfg,
                             const std::filesystem::path& dir) {
  const Kernel k = parse_kernel(cfg.raw);
  const Grid1D g = parse_grid(cfg.raw);
  const OperatorScheme scheme = parse_scheme(cfg.raw);
  const SolverConfig solver = parse_solver(cfg.raw);
  const CertificateTolerances tol = parse_tolerances(cfg.raw);
  const std::string target = cfg.raw.value("target", "layer");
  const bool ground = target == "ground-odd";
  if (!ground && target != "layer")
    throw ConfigError("target must be 'layer' or 'ground-odd'");
  const NonlinearitySpec f =
      make_nonlinearity(cfg.raw.value("nonlinearity", ground ? "quadratic" : "sin"));

  const SolveResult sol = ground ? solve_ground_state(k, f, g, solver, scheme)
                                 : solve_layer(k, f, g, solver, scheme);
  const CertificateReport rep =
      nondegeneracy_certificate(sol, k, f, ground, scheme, tol);

  write_csv(sol.u, (dir / "solution.csv").string());
  std::vector<std::pair<double, double>> spec_rows;
  for (std::size_t i = 0; i < rep.eigs.size(); ++i)
    spec_rows.emplace_back(static_cast<double>(i), rep.eigs[i]);
  write_pairs_csv(dir / "spectrum.csv", "index,eigenvalue", spec_rows);

  json result = {{"kind", cfg.kind},
                 {"convergence", sol.report.to_json()},
                 {"certificate", rep.to_json()},
                 {"verdict", rep.verdict}};
  write_result(dir, result);
  return status_from_verdict(rep.verdict);
}

inline int run_quotient(const ExperimentConfig& cfg,
                        const std::filesystem::path& dir) {
  const Kernel k = parse_kernel(cfg.raw);
  const Grid1D g = parse_grid(cfg.raw);
  const OperatorScheme scheme = parse_scheme(cfg.raw);
  const SolverConfig solver = parse_solver(cfg.raw);
  const CertificateTolerances tol = parse_tolerances(cfg.raw);
  const NonlinearitySpec f = make_nonlinearity(cfg.raw.value("nonlinearity", "sin"));
  const double bump = cfg.raw.value("bump_amplitude", 0.0);

  const SolveResult sol = solve_layer(k, f, g, solver, scheme);
  if (!sol.report.converged) throw std::runtime_error("profile solve failed");
  const PotentialSpec c = linearization_potential(sol.u, f);
  GridFunction uprime = derivative(sol.u, 1.0 + 2.0 * k.order_lower());

  GridFunction other(g, TailModel::zero());
  if (bump > 0.0) {
    other = uprime;
    for (int i = 0; i < g.size(); ++i)
      other[i] += bump * CutoffFamily::profile(2.0 * std::abs(g.node(i)));
    other.tail = uprime.tail;
  } else {
    const LinearizedOperator A(k, c, g, scheme);
    const auto pairs = bottom_spectrum(A, 2, tol);
    if (pairs.values.empty()) throw std::runtime_error("eigensolver breakdown");
    other.values = pairs.vectors[0];
    if (dot(other.values, uprime.values) < 0.0)
      for (auto& v : other.values) v = -v;
  }

  const CertificateReport rep =
      quotient_certificate(uprime, other, k, c, false, scheme, tol);
  write_csv(uprime, (dir / "reference.csv").string());
  write_csv(other, (dir / "candidate.csv").string());
  json result = {{"kind", cfg.kind},
                 {"certificate", rep.to_json()},
                 {"verdict", rep.verdict}};
  write_result(dir, result);
  return status_from_verdict(rep.verdict);
}

inline int run_maxprinciple(const ExperimentConfig& cfg,
                            const std::filesystem::path& dir) {
  const Kernel k = parse_kernel(cfg.raw);
  const Grid1D g = parse_grid(cfg.raw);
  const OperatorScheme scheme = parse_scheme(cfg.raw);
  const CertificateTolerances tol = parse_tolerances(cfg.raw);
  const std::string variant = cfg.raw.value("variant", "layer-derivative");

  CertificateReport rep;
  if (variant == "layer-derivative") {
    const SolverConfig solver = parse_solver(cfg.raw);
    const NonlinearitySpec f =
        make_nonlinearity(cfg.raw.value("nonlinearity", "cubic"));
    const SolveResult sol = solve_layer(k, f, g, solver, scheme);
    if (!sol.report.converged) throw std::runtime_error("profile solve failed");
    const PotentialSpec c = linearization_potential(sol.u, f);
    const GridFunction uprime = derivative(sol.u, 1.0 + 2.0 * k.order_lower());
    rep = max_principle_check(k, c, uprime, false, scheme, tol);
  } else if (variant == "constant") {
    GridFunction cv(g, TailModel::zero(), Symmetry::even);
    for (auto& v : cv.values) v = -1.0;
    const PotentialSpec c =
        make_potential(std::move(cv), true, NegativityRecord{1.0, 1.0});
    GridFunction phi(g, TailModel::constant(-1.0, -1.0));
    for (auto& v : phi.values) v = -1.0;
    rep = max_principle_check(k, c, phi, false, scheme, tol);
  } else if (variant == "odd-gate") {
    const double r0 = require_number(cfg.raw, "r0");
    GridFunction cv(g, TailModel::constant(-1.0, -1.0), Symmetry::even);
    for (auto& v : cv.values) v = -1.0;
    const PotentialSpec c =
        make_potential(std::move(cv), true, NegativityRecord{1.0, 1.0}, 0.0, r0);
    // Odd positive data from (L + 1) w = rho, rho > 0 on the half line.
    const LinearizedOperator A(k, c, g, scheme, true);
    Vec rho(A.size());
    for (std::size_t j = 0; j < A.size(); ++j) {
      const double x = (double(j) + 1.0) * g.h;
      rho[j] = x * std::exp(-x * x);
    }
    Vec wh;
    GmresOptions gopt;
    gopt.rtol = 1e-12;
    if (!gmres(A.op(), rho, wh, gopt).converged)
      throw std::runtime_error("auxiliary solve failed");
    GridFunction phi(g, TailModel::zero(), Symmetry::odd);
    for (int kk = 1; kk <= g.M; ++kk) {
      phi[g.center() + kk] = wh[static_cast<std::size_t>(kk - 1)];
      phi[g.center() - kk] = -wh[static_cast<std::size_t>(kk - 1)];
    }
    rep = max_principle_check(k, c, phi, true, scheme, tol);
  } else {
    throw ConfigError("variant must be layer-derivative|constant|odd-gate");
  }

  json result = {{"kind", cfg.kind},
                 {"variant", variant},
                 {"certificate", rep.to_json()},
                 {"verdict", rep.verdict}};
  write_result(dir, result);
  return status_from_verdict(rep.verdict);
}

inline int run_caccioppoli(const ExperimentConfig& cfg,
                           const std::filesystem::path& dir) {
  const Kernel k = parse_kernel(cfg.raw);
  const Grid1D g = parse_grid(cfg.raw);
  const OperatorScheme scheme = parse_scheme(cfg.raw);
  const double R = cfg.raw.value("cutoff_scale", g.X / 4.0);
  const double factor = cfg.raw.value("multiple", 3.0);

  // Manufactured exact pair: c matches w by construction and wt is an exact
  // multiple, so both premises vanish and the forms agree identically.
  GridFunction w = GridFunction::sample(
      g, [](double x) { return 2.0 + std::exp(-x * x); },
      TailModel::constant(2.0, 2.0));
  const GridFunction Lw = apply_operator(k, w, scheme);
  GridFunction cv(g, TailModel::zero());
  for (int i = 0; i < g.size(); ++i) cv[i] = Lw[i] / w[i];
  const PotentialSpec c = make_potential(std::move(cv), false);
  GridFunction wt = w;
  for (auto& v : wt.values) v *= factor;
  wt.tail = TailModel::constant(2.0 * factor, 2.0 * factor);

  const CaccioppoliReport rep = caccioppoli_check(w, wt, k, c, R, false, scheme);
  const bool pass = rep.verdict != "VIOLATED";
  json result = {{"kind", cfg.kind},
                 {"report", rep.to_json()},
                 {"verdict", pass ? "PASS" : "FAIL"}};
  write_result(dir, result);
  return pass ? 0 : 1;
}

inline int run_scaling(const ExperimentConfig& cfg,
                       const std::filesystem::path& dir) {
  const double s = require_number(cfg.raw, "s");
  const double gamma = require_number(cfg.raw, "gamma");
  const std::string region = require_string(cfg.raw, "region");
  std::vector<double> Rs = cfg.raw.value("R_values", std::vector<double>{4, 8, 16, 32, 64});

  CrossRegion cr;
  CrossTerm term = PowerTerm{0.0};
  double theory = 0.0;
  if (region == "band") {  // S n D with the second-difference weight
    cr = CrossRegion::SIntersectD;
    term = PowerTerm{2.0 * s - 1.0};
    theory = 2.0 * gamma + 3.0 - 2.0 * s;
  } else if (region == "tubes") {  // S \ D with the plain kernel power
    cr = CrossRegion::SMinusD;
    term = PowerTerm{1.0 + 2.0 * s};
    theory = 2.0 * gamma + 1.0 - 2.0 * s;
  } else if (region == "cutoff") {  // uniform bound on all of S
    cr = CrossRegion::SCutoff;
    term = make_fractional_kernel(s, false);
    theory = 0.0;
  } else {
    throw ConfigError("region must be band|tubes|cutoff");
  }
  const double tolerance = cfg.raw.value("slope_tolerance",
                                         region == "cutoff" ? 0.02 : 0.1);

  std::vector<std::pair<double, double>> rows;
  for (double R : Rs)
    rows.emplace_back(R, cross_region_integral(term, R, gamma, cr));
  const ScalingFit fit = fit_scaling_exponent(rows);
  write_pairs_csv(dir / "scaling.csv", "R,value", rows);

  const bool pass = std::abs(fit.slope - theory) <= tolerance;
  json result = {{"kind", cfg.kind},
                 {"slope", fit.slope},
                 {"theory_slope", theory},
                 {"tolerance", tolerance},
                 {"pass", pass},
                 {"verdict", pass ? "PASS" : "FAIL"}};
  write_result(dir, result);
  return pass ? 0 : 1;
}

inline int run_set_identities(const ExperimentConfig& cfg,
                              const std::filesystem::path& dir) {
  const int n = static_cast<int>(cfg.raw.value("n", 1));
  const double R = cfg.raw.value("R", 1.0);
  const std::int64_t samples = cfg.raw.value("samples", std::int64_t{100000});
  const IdentityReport rep = verify_set_identities(R, n, samples, cfg.seed);
  const bool pass = rep.total_violations() == 0;
  json result = {{"kind", cfg.kind},
                 {"report", rep.to_json()},
                 {"verdict", pass ? "PASS" : "FAIL"}};
  write_result(dir, result);
  return pass ? 0 : 1;
}

// result.json and CSV outputs are re-read and checked before the process
// reports success.
inline void check_outputs(const std::filesystem::path& dir) {
  std::ifstream in(dir / "result.json");
  if (!in) throw std::runtime_error("result.json missing");
  json result = json::parse(in);
  for (const char* key : {"kind", "verdict"})
    if (!result.contains(key))
      throw std::runtime_error(std::string("result.json lacks '") + key + "'");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".csv") continue;
    std::ifstream csv(entry.path());
    std::string header;
    if (!std::getline(csv, header) || header.find(',') == std::string::npos)
      throw std::runtime_error("malformed csv " + entry.path().string());
  }
}

}  // namespace expdetail

inline ExperimentConfig parse_experiment_config(const json& j,
                                                const std::string& kind,
                                                const std::string& out_dir) {
  static const std::set<std::string> kKinds = {
      "kernel-check", "layer",        "ground",
      "nondegeneracy", "quotient",    "maxprinciple",
      "caccioppoli",  "scaling",      "set-identities"};
  ExperimentConfig cfg;
  cfg.kind = kind.empty() ? j.value("kind", "") : kind;
  if (!kKinds.count(cfg.kind))
    throw ConfigError("unknown experiment kind '" + cfg.kind + "'");
  if (j.contains("kind") && j["kind"].get<std::string>() != cfg.kind)
    throw ConfigError("config field 'kind' disagrees with the invocation");
  cfg.raw = j;
  cfg.out_dir = out_dir.empty() ? j.value("out", std::string(".")) : out_dir;
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

// Executes the named pipeline and writes result.json, CSV tables, and
// run.log under out_dir. Exit statuses: 0 all PASS, 1 any FAIL, 2 any
// HYPOTHESES-NOT-MET, 3 configuration error.
inline int run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  {
    std::ofstream log(dir / "run.log");
    log << "kind: " << cfg.kind << "\n";
    log << "seed: " << cfg.seed << "\n";
    log << "config: " << cfg.raw.dump(2) << "\n";
  }

  int status = 3;
  if (cfg.kind == "kernel-check")
    status = expdetail::run_kernel_check(cfg, dir);
  else if (cfg.kind == "layer")
    status = expdetail::run_profile_solve(cfg, dir, false);
  else if (cfg.kind == "ground")
    status = expdetail::run_profile_solve(cfg, dir, true);
  else if (cfg.kind == "nondegeneracy")
    status = expdetail::run_nondegeneracy(cfg, dir);
  else if (cfg.kind == "quotient")
    status = expdetail::run_quotient(cfg, dir);
  else if (cfg.kind == "maxprinciple")
    status = expdetail::run_maxprinciple(cfg, dir);
  else if (cfg.kind == "caccioppoli")
    status = expdetail::run_caccioppoli(cfg, dir);
  else if (cfg.kind == "scaling")
    status = expdetail::run_scaling(cfg, dir);
  else if (cfg.kind == "set-identities")
    status = expdetail::run_set_identities(cfg, dir);

  expdetail::check_outputs(dir);
  return status;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_EXPERIMENT_HPP
