#include "heston/cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "heston/harness.hpp"

namespace heston {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitProperty = 3;

// Unknown keys are rejected so a typo in a coefficient name cannot silently
// fall back to a default.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw Error("ConfigError", where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw Error("UnknownKey", "unknown key '" + key + "' in " + where);
  }
}

double num(const json& obj, const char* key, double dflt) {
  return obj.contains(key) ? obj.at(key).get<double>() : dflt;
}

Profile1D parse_profile(const json& p, const std::string& where) {
  check_keys(p, {"type", "a", "phase", "coeffs", "p", "center", "width",
                 "power", "value"},
             where);
  const std::string type = p.at("type").get<std::string>();
  if (type == "const") return const_profile(num(p, "value", 1.0));
  if (type == "sin") return sin_profile(num(p, "a", 1.0), num(p, "phase", 0.0));
  if (type == "cos") return cos_profile(num(p, "a", 1.0));
  if (type == "exp") return exp_profile(num(p, "a", 1.0));
  if (type == "pow") return pow_profile(num(p, "p", 1.0));
  if (type == "gaussian")
    return gaussian_profile(num(p, "center", 0.0), num(p, "width", 1.0));
  if (type == "bump")
    return bump_profile(num(p, "center", 0.0), num(p, "width", 1.0),
                        static_cast<int>(num(p, "power", 6)));
  if (type == "cusp")
    return cusp_profile(num(p, "center", 0.0), num(p, "p", -0.45));
  if (type == "poly") {
    std::vector<double> c;
    for (const auto& v : p.at("coeffs")) c.push_back(v.get<double>());
    return poly_profile(std::move(c));
  }
  throw Error("ConfigError", "unknown profile type '" + type + "' in " + where);
}

AnalyticField parse_field(const json& f, const std::string& where) {
  check_keys(f, {"type", "value", "coeffs", "x", "y", "a", "b"}, where);
  const std::string type = f.at("type").get<std::string>();
  if (type == "constant") return poly_field({{num(f, "value", 1.0)}});
  if (type == "poly") {
    std::vector<std::vector<double>> c;
    for (const auto& row : f.at("coeffs")) {
      std::vector<double> r;
      for (const auto& v : row) r.push_back(v.get<double>());
      c.push_back(std::move(r));
    }
    return poly_field(std::move(c));
  }
  if (type == "separable")
    return separable_field(parse_profile(f.at("x"), where + ".x"),
                           parse_profile(f.at("y"), where + ".y"));
  if (type == "sin_exp")
    return separable_field(sin_profile(num(f, "a", 1.0)),
                           exp_profile(num(f, "b", -1.0)));
  throw Error("ConfigError", "unknown field type '" + type + "' in " + where);
}

Coefficients parse_coefficients(const json& cfg) {
  if (!cfg.contains("coefficients"))
    throw Error("ConfigError", "missing 'coefficients' block");
  const json& c = cfg.at("coefficients");
  check_keys(c, {"sigma", "rho", "kappa", "theta", "c0", "q", "gamma"},
             "coefficients");
  Coefficients out;
  out.sigma = num(c, "sigma", 1.0);
  out.rho = num(c, "rho", 0.0);
  out.kappa = num(c, "kappa", 1.0);
  out.theta = num(c, "theta", 0.5);
  out.c0 = num(c, "c0", 0.0);
  out.q = num(c, "q", 0.0);
  out.gamma = num(c, "gamma", 0.0);
  return validate_coefficients(out);
}

HalfPlaneDomain parse_domain(const json& cfg) {
  if (!cfg.contains("domain"))
    throw Error("ConfigError", "missing 'domain' block");
  const json& d = cfg.at("domain");
  check_keys(d, {"x_min", "x_max", "y_max"}, "domain");
  return HalfPlaneDomain(num(d, "x_min", -1.0), num(d, "x_max", 1.0),
                         num(d, "y_max", 1.0));
}

struct GridSpec {
  int nx = 64, ny = 64;
  double grading = 2.0;
};

GridSpec parse_grid(const json& cfg) {
  GridSpec out;
  if (!cfg.contains("grid")) return out;
  const json& g = cfg.at("grid");
  check_keys(g, {"nx", "ny", "grading"}, "grid");
  out.nx = static_cast<int>(num(g, "nx", 64));
  out.ny = static_cast<int>(num(g, "ny", 64));
  out.grading = num(g, "grading", 2.0);
  return out;
}

SolveOptions parse_solver(const json& cfg) {
  SolveOptions opt;
  if (!cfg.contains("solver")) return opt;
  const json& s = cfg.at("solver");
  check_keys(s, {"tol", "max_iter", "restart", "ilut_droptol", "ilut_fill"},
             "solver");
  opt.tol = num(s, "tol", 1e-10);
  opt.max_iter = static_cast<int>(num(s, "max_iter", 10000));
  opt.restart = static_cast<int>(num(s, "restart", 30));
  opt.ilut_droptol = num(s, "ilut_droptol", 1e-7);
  opt.ilut_fill = static_cast<int>(num(s, "ilut_fill", 40));
  return opt;
}

std::vector<int> parse_ladder(const json& block, const char* key,
                              std::vector<int> dflt) {
  if (!block.contains(key)) return dflt;
  std::vector<int> out;
  for (const auto& v : block.at(key)) out.push_back(v.get<int>());
  if (out.empty()) throw Error("ConfigError", "empty refinement ladder");
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& s) {
  std::ofstream os(path);
  if (!os) throw Error("IoError", "cannot open " + path.string());
  os << s;
}

// Fully resolved configuration echo written next to every command's output.
void echo_config(const json& resolved, const CliOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "config_resolved.json",
                  resolved.dump(2) + "\n");
}

json coefficients_json(const Coefficients& c) {
  return json{{"sigma", c.sigma}, {"rho", c.rho},     {"kappa", c.kappa},
              {"theta", c.theta}, {"c0", c.c0},       {"q", c.q},
              {"gamma", c.gamma}};
}

// ---------------------------------------------------------------------------

int cmd_validate(const json& cfg, const CliOptions& opt) {
  const Coefficients c = parse_coefficients(cfg);
  const auto d = derived_constants(c);
  json resolved{{"command", "validate"}, {"coefficients", coefficients_json(c)}};
  resolved["derived"] = {{"nu0", d.nu0},   {"lambda", d.lambda},
                         {"beta", d.beta}, {"mu", d.mu},
                         {"a1", d.a1},     {"b1", d.b1},
                         {"b1_is_zero", d.b1_is_zero()}};
  echo_config(resolved, opt);
  std::cout << resolved["derived"].dump(2) << "\n";
  return kExitOk;
}

struct ProblemSetup {
  Coefficients c;
  HalfPlaneDomain dom;
  GridSpec grid;
  SolveOptions solver;
  std::optional<AnalyticField> manufactured;  // u*: f = A u*, g = trace u*
  std::optional<AnalyticField> source;        // f with zero Dirichlet data
};

ProblemSetup parse_problem(const json& cfg) {
  ProblemSetup setup{parse_coefficients(cfg), parse_domain(cfg),
                     parse_grid(cfg), parse_solver(cfg), std::nullopt,
                     std::nullopt};
  if (cfg.contains("field"))
    setup.manufactured = parse_field(cfg.at("field"), "field");
  if (cfg.contains("source")) setup.source = parse_field(cfg.at("source"), "source");
  if (!setup.manufactured && !setup.source)
    throw Error("ConfigError", "need a 'field' (manufactured) or 'source' block");
  return setup;
}

struct SolvedProblem {
  GridPtr grid;
  GridFunction f;
  SolveResult result;
};

SolvedProblem solve_setup(const ProblemSetup& setup, int n_override = 0) {
  const int nx = n_override > 0 ? n_override : setup.grid.nx;
  const int ny = n_override > 0 ? n_override : setup.grid.ny;
  auto grid = make_grid(setup.dom, nx, ny, setup.grid.grading);
  GridFunction f = setup.manufactured
                       ? GridFunction::sample(
                             grid, applied_field(setup.c, *setup.manufactured))
                       : GridFunction::sample(grid, *setup.source);
  GridFunction bc = setup.manufactured
                        ? GridFunction::sample(grid, *setup.manufactured)
                        : GridFunction::zero(grid);
  auto res = solve_variational(setup.c, grid, f, bc, setup.solver);
  return {grid, std::move(f), std::move(res)};
}

int cmd_solve(const json& cfg, const CliOptions& opt) {
  const ProblemSetup setup = parse_problem(cfg);
  auto solved = solve_setup(setup);
  if (solved.result.status == SolveStatus::singular) {
    std::cerr << "SingularSystem: preconditioner failed\n";
    return kExitNumerical;
  }
  if (solved.result.status == SolveStatus::not_converged) {
    std::cerr << "NotConverged: residual " << solved.result.final_residual
              << " after " << solved.result.iterations << " iterations\n";
    return kExitNumerical;
  }
  std::filesystem::create_directories(opt.out_dir);
  write_grid_function(
      (std::filesystem::path(opt.out_dir) / "solution.grid").string(),
      solved.result.solution);
  json resolved{{"command", "solve"},
                {"coefficients", coefficients_json(setup.c)},
                {"domain",
                 {{"x_min", setup.dom.x_min},
                  {"x_max", setup.dom.x_max},
                  {"y_max", setup.dom.y_max}}},
                {"grid",
                 {{"nx", setup.grid.nx},
                  {"ny", setup.grid.ny},
                  {"grading", setup.grid.grading}}},
                {"solver",
                 {{"tol", setup.solver.tol},
                  {"max_iter", setup.solver.max_iter},
                  {"restart", setup.solver.restart}}},
                {"iterations", solved.result.iterations},
                {"residual", solved.result.final_residual}};
  echo_config(resolved, opt);
  std::cout << "solved: " << solved.result.iterations << " iterations, residual "
            << solved.result.final_residual << "\n";
  return kExitOk;
}

int cmd_norms(const json& cfg, const CliOptions& opt) {
  json norms = cfg.contains("norms") ? cfg.at("norms") : json::object();
  check_keys(norms, {"tags", "k", "p", "alpha"}, "norms");

  GridFunction u = [&] {
    if (cfg.contains("input")) {
      const json& in = cfg.at("input");
      check_keys(in, {"file"}, "input");
      return read_grid_function(in.at("file").get<std::string>());
    }
    const HalfPlaneDomain dom = parse_domain(cfg);
    const GridSpec gs = parse_grid(cfg);
    if (!cfg.contains("field"))
      throw Error("ConfigError", "norms needs an 'input' file or a 'field'");
    return GridFunction::sample(make_grid(dom, gs.nx, gs.ny, gs.grading),
                                parse_field(cfg.at("field"), "field"));
  }();

  const Coefficients c = parse_coefficients(cfg);
  const auto d = derived_constants(c);
  WeightSpec w = weight_from_constants(d, c.gamma);
  if (cfg.contains("weight")) {
    const json& wj = cfg.at("weight");
    check_keys(wj, {"beta", "mu", "gamma", "m"}, "weight");
    w.beta = num(wj, "beta", w.beta);
    w.mu = num(wj, "mu", w.mu);
    w.gamma = num(wj, "gamma", w.gamma);
    w.m = static_cast<int>(num(wj, "m", 0));
  }

  NormRequest req;
  req.k = static_cast<int>(num(norms, "k", 1));
  req.p = num(norms, "p", 2.0);
  req.alpha = num(norms, "alpha", 0.5);
  req.weight = w;
  req.holder.seed = opt.seed;

  std::vector<std::string> tags;
  if (norms.contains("tags"))
    for (const auto& t : norms.at("tags")) tags.push_back(t.get<std::string>());
  else
    tags = {"Lp", "H1", "H2"};

  std::ostringstream csv;
  csv << "tag,k,p,alpha,value\n";
  for (const auto& tag : tags) {
    static const std::map<std::string, NormTag> lookup{
        {"Lp", NormTag::Lp},           {"H1", NormTag::H1},
        {"H2", NormTag::H2},           {"Hk", NormTag::Hk},
        {"calHk", NormTag::calHk},     {"Wkp", NormTag::Wkp},
        {"Calphas", NormTag::Calphas}, {"Ckalphas", NormTag::Ckalphas},
        {"Ck2alphas", NormTag::Ck2alphas}, {"C11s", NormTag::C11s}};
    auto it = lookup.find(tag);
    if (it == lookup.end())
      throw Error("UnsupportedTag", "unknown norm tag '" + tag + "'");
    req.tag = it->second;
    const bool holder = req.tag == NormTag::Calphas ||
                        req.tag == NormTag::Ckalphas ||
                        req.tag == NormTag::Ck2alphas;
    const double value = holder ? holder_norm(u, req) : sobolev_norm(u, req);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g\n", tag.c_str(),
                  req.k, req.p, req.alpha, value);
    csv << buf;
  }
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "norms.csv", csv.str());
  json resolved{{"command", "norms"},
                {"coefficients", coefficients_json(c)},
                {"weight",
                 {{"beta", w.beta}, {"mu", w.mu}, {"gamma", w.gamma}, {"m", w.m}}},
                {"norms", {{"k", req.k}, {"p", req.p}, {"alpha", req.alpha}}}};
  echo_config(resolved, opt);
  std::cout << csv.str();
  return kExitOk;
}

int cmd_commutators(const json& cfg, const CliOptions& opt) {
  json block = cfg.contains("commutators") ? cfg.at("commutators") : json::object();
  check_keys(block, {"sets", "max_m", "max_k", "tolerance"}, "commutators");
  const int sets = static_cast<int>(num(block, "sets", 100));
  const int max_m = static_cast<int>(num(block, "max_m", 3));
  const int max_k = static_cast<int>(num(block, "max_k", 3));
  const double tol = num(block, "tolerance", 1e-10);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> upt(-1.0, 1.0);

  auto battery = [&]() {
    std::vector<AnalyticField> fields;
    for (int t = 0; t < 2; ++t) {
      std::vector<std::vector<double>> cf(6, std::vector<double>(6, 0.0));
      for (int i = 0; i <= 5; ++i)
        for (int j = 0; i + j <= 5; ++j) cf[i][j] = upt(rng);
      fields.push_back(poly_field(std::move(cf)));
    }
    fields.push_back(separable_field(sin_profile(1.3), exp_profile(-0.7)));
    fields.push_back(separable_field(exp_profile(0.5), sin_profile(1.1)));
    return fields;
  };

  std::ostringstream csv;
  csv << "set,field,form,m,k,residual,scale\n";
  bool ok = true;
  for (int s = 0; s < sets; ++s) {
    Coefficients c;
    c.sigma = 0.3 + 2.0 * u01(rng);
    c.rho = -0.9 + 1.8 * u01(rng);
    c.kappa = 0.2 + 2.0 * u01(rng);
    c.theta = 0.2 + 2.0 * u01(rng);
    c.c0 = 1.5 * u01(rng);
    c.q = -1.0 + 2.0 * u01(rng);
    const auto fields = battery();
    const double x = upt(rng), y = 0.1 + u01(rng);
    for (std::size_t fi = 0; fi < fields.size(); ++fi) {
      for (int m = 1; m <= max_m; ++m) {
        const auto r = commutator_residual_shifted(c, fields[fi], m, x, y);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d,%zu,shifted,%d,,%.17g,%.17g\n", s,
                      fi, m, r.residual, r.scale);
        csv << buf;
        if (r.residual > tol * r.scale) ok = false;
      }
      for (int k = 0; k <= max_k; ++k)
        for (int m = 0; m <= k && m <= max_m; ++m) {
          const auto r = commutator_residual_mixed(c, fields[fi], k, m, x, y);
          char buf[160];
          std::snprintf(buf, sizeof buf, "%d,%zu,mixed,%d,%d,%.17g,%.17g\n", s,
                        fi, m, k, r.residual, r.scale);
          csv << buf;
          if (r.residual > tol * r.scale) ok = false;
        }
    }
  }
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "commutators.csv",
                  csv.str());
  json resolved{{"command", "commutators"},
                {"commutators",
                 {{"sets", sets},
                  {"max_m", max_m},
                  {"max_k", max_k},
                  {"tolerance", tol}}},
                {"seed", opt.seed}};
  echo_config(resolved, opt);
  std::cout << (ok ? "commutator identities hold\n"
                   : "commutator residual exceeded tolerance\n");
  return ok ? kExitOk : kExitProperty;
}

EstimateSpec parse_estimate(const json& cfg) {
  if (!cfg.contains("estimate"))
    throw Error("ConfigError", "missing 'estimate' block");
  const json& e = cfg.at("estimate");
  check_keys(e, {"kind", "k", "alpha", "p", "z0", "R", "R0", "rect", "ladder",
                 "band", "alpha_sweep"},
             "estimate");
  EstimateSpec spec;
  const std::string kind_name = e.at("kind").get<std::string>();
  const auto parsed = estimate_kind_from_string(kind_name);
  if (!parsed)
    throw Error("ConfigError", "unknown estimate kind '" + kind_name + "'");
  spec.kind = *parsed;
  spec.k = static_cast<int>(num(e, "k", spec.kind == EstimateKind::hk2_interior ? 1 : 0));
  spec.alpha = num(e, "alpha", 0.5);
  spec.p = num(e, "p", 0.0);
  if (e.contains("z0")) {
    spec.z0.x = e.at("z0").at(0).get<double>();
    spec.z0.y = e.at("z0").at(1).get<double>();
  }
  spec.R = num(e, "R", 0.25);
  spec.R0 = num(e, "R0", 0.5);
  if (e.contains("rect")) {
    spec.rect_x0 = e.at("rect").at(0).get<double>();
    spec.rect_x1 = e.at("rect").at(1).get<double>();
    spec.rect_y1 = e.at("rect").at(2).get<double>();
  }
  return spec;
}

int cmd_sweep(const json& cfg, const CliOptions& opt) {
  const ProblemSetup setup = parse_problem(cfg);
  EstimateSpec spec = parse_estimate(cfg);
  spec.holder.seed = opt.seed;
  const json& e = cfg.at("estimate");
  const std::vector<int> ladder = parse_ladder(e, "ladder", {64, 128, 256});
  const double band = num(e, "band", 0.05);

  std::vector<SolvedProblem> solves(ladder.size());
  auto run_one = [&](std::size_t i) {
    solves[i] = solve_setup(setup, ladder[i]);
    if (solves[i].result.status != SolveStatus::converged)
      throw Error("NotConverged", "sweep solve failed at n = " +
                                      std::to_string(ladder[i]));
  };
  if (opt.threads > 1) {
    std::vector<std::future<void>> futs;
    for (std::size_t i = 0; i < ladder.size(); ++i)
      futs.push_back(std::async(std::launch::async, run_one, i));
    for (auto& f : futs) f.get();
  } else {
    for (std::size_t i = 0; i < ladder.size(); ++i) run_one(i);
  }
  std::vector<EstimateReport> reports(ladder.size());
  for (std::size_t i = 0; i < ladder.size(); ++i)
    reports[i] =
        estimate_ratio(spec, solves[i].result.solution, solves[i].f, setup.c);

  std::ostringstream csv;
  write_report_csv_header(csv);
  for (const auto& r : reports) write_report_csv_row(csv, r);

  // optional exponent sweep for the Hoelder-type kinds
  const bool do_alpha_sweep = e.contains("alpha_sweep") &&
                              e.at("alpha_sweep").get<bool>();
  double empirical_alpha = 0.0;
  if (do_alpha_sweep) {
    std::vector<const GridFunction*> us, fs;
    for (const auto& s : solves) {
      us.push_back(&s.result.solution);
      fs.push_back(&s.f);
    }
    const auto sweep = alpha_sweep(spec, us, fs, setup.c, band);
    for (const auto& lad : sweep.ladders)
      for (const auto& r : lad) write_report_csv_row(csv, r);
    empirical_alpha = sweep.empirical_alpha;
  }
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "sweep.csv", csv.str());

  json resolved{{"command", "sweep"},
                {"coefficients", coefficients_json(setup.c)},
                {"estimate",
                 {{"kind", to_string(spec.kind)},
                  {"k", spec.k},
                  {"alpha", spec.alpha},
                  {"p", spec.p},
                  {"R", spec.R},
                  {"R0", spec.R0},
                  {"band", band},
                  {"alpha_sweep", do_alpha_sweep}}},
                {"ladder", ladder},
                {"seed", opt.seed}};
  echo_config(resolved, opt);
  std::cout << csv.str();
  if (do_alpha_sweep)
    std::cout << "empirical_alpha," << empirical_alpha << "\n";

  const auto chk = check_ratio_stabilization(reports, band);
  if (!chk.ok) {
    std::cerr << "ratio stabilization violated at ladder index "
              << chk.first_violation << "\n";
    return kExitProperty;
  }
  return kExitOk;
}

int cmd_convergence(const json& cfg, const CliOptions& opt) {
  const ProblemSetup setup = parse_problem(cfg);
  if (!setup.manufactured)
    throw Error("ConfigError", "convergence needs a manufactured 'field'");
  json block = cfg.contains("convergence") ? cfg.at("convergence") : json::object();
  check_keys(block, {"ladder"}, "convergence");
  const std::vector<int> ladder = parse_ladder(block, "ladder", {32, 64, 128});

  ConvergenceTable table;
  try {
    table = convergence_study(*setup.manufactured, setup.c, setup.dom, ladder,
                              setup.grid.grading, setup.solver);
  } catch (const Error& err) {
    if (err.code() == "NotConverged") {
      std::cerr << err.what() << "\n";
      return kExitNumerical;
    }
    throw;
  }
  std::ostringstream csv;
  write_convergence_csv(csv, table);
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "convergence.csv",
                  csv.str());
  json resolved{{"command", "convergence"},
                {"coefficients", coefficients_json(setup.c)},
                {"ladder", ladder},
                {"grading", setup.grid.grading},
                {"fitted_l2_order", table.fitted_l2_order}};
  echo_config(resolved, opt);
  std::cout << csv.str();
  std::cout << "fitted_l2_order," << table.fitted_l2_order << "\n";
  return kExitOk;
}

int cmd_probe(const json& cfg, const CliOptions& opt) {
  const ProblemSetup setup = parse_problem(cfg);
  if (!setup.source)
    throw Error("ConfigError", "probe needs a 'source' block");
  json block = cfg.contains("probe") ? cfg.at("probe") : json::object();
  check_keys(block, {"ladder", "k", "strip_height", "x_margin"}, "probe");
  const std::vector<int> ladder = parse_ladder(block, "ladder", {64, 128, 256});
  const int k = static_cast<int>(num(block, "k", 3));
  const double strip = num(block, "strip_height", 0.2);
  const double margin = num(block, "x_margin", 0.0);

  // the strided probe estimator assumes comparable row spacings, so the
  // probe always runs on uniform grids
  const auto rep = smoothness_probe(*setup.source, setup.c, setup.dom, ladder,
                                    k, strip, margin, 0.5, 2.0, setup.solver,
                                    1.0);
  std::ostringstream csv;
  write_probe_csv(csv, rep);
  std::filesystem::create_directories(opt.out_dir);
  write_text_file(std::filesystem::path(opt.out_dir) / "probe.csv", csv.str());
  json resolved{{"command", "probe"},
                {"coefficients", coefficients_json(setup.c)},
                {"ladder", ladder},
                {"k", k},
                {"strip_height", strip}};
  echo_config(resolved, opt);
  std::cout << csv.str();
  std::cout << (rep.pass ? "probe stabilized\n" : "probe failed to stabilize\n");
  return rep.pass ? kExitOk : kExitProperty;
}

int dispatch(const json& cfg, const CliOptions& opt) {
  check_keys(cfg,
             {"command", "coefficients", "domain", "grid", "weight", "field",
              "source", "input", "norms", "commutators", "estimate",
              "convergence", "probe", "solver"},
             "configuration");
  if (!cfg.contains("command"))
    throw Error("ConfigError", "missing 'command'");
  const std::string cmd = cfg.at("command").get<std::string>();
  if (cmd == "validate") return cmd_validate(cfg, opt);
  if (cmd == "solve") return cmd_solve(cfg, opt);
  if (cmd == "norms") return cmd_norms(cfg, opt);
  if (cmd == "commutators") return cmd_commutators(cfg, opt);
  if (cmd == "sweep") return cmd_sweep(cfg, opt);
  if (cmd == "convergence") return cmd_convergence(cfg, opt);
  if (cmd == "probe") return cmd_probe(cfg, opt);
  throw Error("ConfigError", "unknown command '" + cmd + "'");
}

}  // namespace

int run_config_text(const std::string& config_json, const CliOptions& options) {
  try {
    const json cfg = json::parse(config_json);
    return dispatch(cfg, options);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    const std::string code = e.code();
    if (code == "NotConverged" || code == "SingularSystem") return kExitNumerical;
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    return kExitConfig;
  }
}

int run_cli(const CliOptions& options) {
  std::ifstream is(options.config_path);
  if (!is) {
    std::cerr << "IoError: cannot open config " << options.config_path << "\n";
    return kExitConfig;
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return run_config_text(ss.str(), options);
}

}  // namespace heston
