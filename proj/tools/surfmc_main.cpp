// surfmc command line: Monte-Carlo convergence studies for advection-diffusion
// with random diffusion coefficients on evolving surfaces.
//
//   surfmc run    --experiment ellipse2d --levels 3 --replicates 20 ...
//   surfmc verify [--fault alpha-negative]
//
// `run` executes the coupled (h, tau, M) refinement study and emits a markdown
// table on stdout plus optional CSV/markdown files; progress and solver
// statistics go to stderr.  `verify` runs the fast self-check suite and prints
// one [ ok ]/[FAIL] line per property.
//
// Configuration precedence: command-line flag > SURFMC_* environment variable
// (seed, workers) > --config file (flat key=value lines) > built-in default.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <surfmc.hpp>

namespace {

bool flag_on_command_line(int argc, char** argv, std::string_view name) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == name) return true;
    if (arg.size() > name.size() && arg.substr(0, name.size()) == name && arg[name.size()] == '=') return true;
  }
  return false;
}

// --- config file -------------------------------------------------------------
//
// Flat key=value lines, `#`/`;` comments.  Keys mirror the long flag names
// without the leading dashes.  A value from the file is applied only when the
// matching flag is absent from the command line, so flags always win.

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void config_line_error(const std::string& key, int line_no, const std::string& message) {
  throw surfmc::ConfigError(key, "config line " + std::to_string(line_no) + ": " + message);
}

double parse_double(const std::string& key, const std::string& v, int line_no) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') config_line_error(key, line_no, "'" + v + "' is not a number");
  return x;
}

long parse_long(const std::string& key, const std::string& v, int line_no) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') config_line_error(key, line_no, "'" + v + "' is not an integer");
  return x;
}

std::uint64_t parse_uint64(const std::string& key, const std::string& v, int line_no) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') config_line_error(key, line_no, "'" + v + "' is not an unsigned integer");
  return static_cast<std::uint64_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v, int line_no) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  config_line_error(key, line_no, "'" + v + "' is not a boolean");
}

void apply_config_file(int argc, char** argv, const std::string& path, surfmc::RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw surfmc::ConfigError("config", "cannot open config file " + path);
  const auto flag_given = [&](std::string_view flag) { return flag_on_command_line(argc, argv, flag); };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) config_line_error("config", line_no, "expected key=value, got '" + entry + "'");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    if (flag_given("--" + key)) continue;
    if (key == "experiment") cfg.experiment = value;
    else if (key == "levels") cfg.levels = static_cast<int>(parse_long(key, value, line_no));
    else if (key == "tau0") cfg.tau0 = parse_double(key, value, line_no);
    else if (key == "m0") cfg.m0 = parse_long(key, value, line_no);
    else if (key == "tau-refine") cfg.tau_refine = parse_double(key, value, line_no);
    else if (key == "m-growth") cfg.m_growth = parse_long(key, value, line_no);
    else if (key == "replicates") cfg.replicates = static_cast<int>(parse_long(key, value, line_no));
    else if (key == "seed") cfg.seed = parse_uint64(key, value, line_no);
    else if (key == "tol") cfg.tol = parse_double(key, value, line_no);
    else if (key == "workers") cfg.workers = static_cast<int>(parse_long(key, value, line_no));
    else if (key == "horizon") cfg.horizon = parse_double(key, value, line_no);
    else if (key == "out-csv") cfg.out_csv = value;
    else if (key == "out-md") cfg.out_md = value;
    else if (key == "mesh-dump") cfg.mesh_dump = value;
    else if (key == "affine-path") {
      if (!flag_given("--generic-path")) cfg.affine_path = parse_bool(key, value, line_no);
    } else if (key == "generic-path") {
      if (!flag_given("--affine-path")) cfg.affine_path = !parse_bool(key, value, line_no);
    } else {
      config_line_error("config", line_no, "unknown key '" + key + "'");
    }
  }
}

// SURFMC_SEED / SURFMC_WORKERS sit between explicit flags and the config file.
void apply_env_overrides(int argc, char** argv, surfmc::RunConfig& cfg) {
  if (const char* s = std::getenv("SURFMC_SEED"); s && !flag_on_command_line(argc, argv, "--seed")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw surfmc::ConfigError("seed", "SURFMC_SEED must be an unsigned integer");
    cfg.seed = static_cast<std::uint64_t>(v);
  }
  if (const char* s = std::getenv("SURFMC_WORKERS"); s && !flag_on_command_line(argc, argv, "--workers")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 0) throw surfmc::ConfigError("workers", "SURFMC_WORKERS must be >= 0");
    cfg.workers = static_cast<int>(v);
  }
}

template <int N>
void dump_meshes(const surfmc::RunConfig& cfg, const surfmc::EvolvingSurface<N>& surface) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.mesh_dump);
  for (int level = 0; level <= cfg.levels; ++level) {
    const auto mesh = surfmc::initial_mesh(surface, level);
    const auto positions = surfmc::vertices_at(mesh, surface, 0.0);
    const fs::path path = fs::path(cfg.mesh_dump) / (cfg.experiment + "_level" + std::to_string(level) + ".off");
    std::ofstream os(path);
    if (!os) throw surfmc::Error("cannot open mesh dump file " + path.string());
    surfmc::dump_off(os, mesh, positions);
    std::cerr << "wrote " << path.string() << " (" << mesh.vertex_count() << " vertices, " << mesh.element_count()
              << " elements)\n";
  }
}

template <class Case>
surfmc::StudyResult run_case(const surfmc::RunConfig& cfg, const surfmc::StudyOptions& options) {
  const auto problem = surfmc::make_problem<Case>(cfg.horizon);
  if (!cfg.mesh_dump.empty()) dump_meshes<Case::ambient>(cfg, problem.surface);
  const auto schedule = surfmc::coupled_schedule(cfg.levels, cfg.tau0, cfg.m0, cfg.tau_refine, cfg.m_growth);
  return surfmc::convergence_study(problem, schedule, options);
}

int run_study(const surfmc::RunConfig& cfg) {
  surfmc::StudyOptions options = surfmc::study_options(cfg, std::thread::hardware_concurrency());
  options.progress = [](const std::string& line) { std::cerr << line << std::endl; };
  std::cerr << "experiment " << cfg.experiment << ", levels 0.." << cfg.levels << ", replicates " << cfg.replicates
            << ", seed " << cfg.seed << ", workers " << options.workers << "\n";

  const auto started = std::chrono::steady_clock::now();
  const surfmc::StudyResult result = cfg.experiment == "ellipse2d"
                                         ? run_case<surfmc::EllipseCase>(cfg, options)
                                         : run_case<surfmc::EllipsoidCase>(cfg, options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  surfmc::write_markdown(std::cout, result.rows);
  if (!cfg.out_csv.empty()) {
    std::ofstream os(cfg.out_csv, std::ios::binary);
    if (!os) throw surfmc::Error("cannot open " + cfg.out_csv);
    surfmc::write_csv(os, result.rows);
    std::cerr << "wrote " << cfg.out_csv << "\n";
  }
  if (!cfg.out_md.empty()) {
    std::ofstream os(cfg.out_md, std::ios::binary);
    if (!os) throw surfmc::Error("cannot open " + cfg.out_md);
    surfmc::write_markdown(os, result.rows);
    std::cerr << "wrote " << cfg.out_md << "\n";
  }
  std::fprintf(stderr, "wall clock %.1fs; %ld implicit-Euler solves, %ld CG iterations, max relative residual %.3g\n",
               wall, result.stats.solves, result.stats.total_cg_iterations, result.stats.max_relative_residual);
  return 0;
}

// --- verify subcommand -------------------------------------------------------

class Verifier {
 public:
  template <class Body>
  void check(const std::string& name, Body&& body) {
    try {
      const std::string detail = body();
      std::cout << "[ ok ] " << name << (detail.empty() ? "" : "  (" + detail + ")") << "\n";
    } catch (const std::exception& e) {
      failed_.push_back(name);
      std::cout << "[FAIL] " << name << ": " << e.what() << "\n";
    }
  }

  int finish() const {
    if (failed_.empty()) {
      std::cout << "all checks passed\n";
      return 0;
    }
    std::cout << failed_.size() << " check(s) failed:";
    for (const auto& name : failed_) std::cout << " " << name;
    std::cout << "\n";
    return 1;
  }

 private:
  std::vector<std::string> failed_;
};

void expect(bool cond, const std::string& message) {
  if (!cond) throw surfmc::Error(message);
}

std::string formatted(const char* fmt, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::string check_quadrature() {
  double worst = 0.0;
  const auto& seg = surfmc::reference_quadrature<2>();
  for (int p = 0; p <= 4; ++p) {
    double q = 0.0;
    for (int i = 0; i < seg.point_count; ++i) q += seg.weights[i] * std::pow(seg.barycentric[i][1], p);
    worst = std::max(worst, std::abs(q - 1.0 / (p + 1)));
  }
  const auto& tri = surfmc::reference_quadrature<3>();
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      double q = 0.0;
      for (int i = 0; i < tri.point_count; ++i)
        q += tri.weights[i] * std::pow(tri.barycentric[i][1], a) * std::pow(tri.barycentric[i][2], b);
      const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      worst = std::max(worst, std::abs(q - exact));
    }
  expect(worst <= 1e-14, formatted("monomial defect %.3g exceeds 1e-14", worst));
  return formatted("degree <= 4 monomials, max defect %.3g", worst);
}

std::string check_element_matrices() {
  double worst = 0.0;
  {  // unit segment in R^2: closed forms vs quadrature of lambda_i lambda_j
    const std::array<surfmc::Vec<2>, 2> p{{{0.0, 0.0}, {1.0, 0.0}}};
    const auto frame = surfmc::element_frame(p);
    const auto& rule = surfmc::reference_quadrature<2>();
    const double mass_exact[2][2] = {{1.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 3}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double q = 0.0;
        for (int k = 0; k < rule.point_count; ++k)
          q += rule.weights[k] * frame.measure * rule.barycentric[k][i] * rule.barycentric[k][j];
        worst = std::max(worst, std::abs(q - mass_exact[i][j]));
        const double s = frame.measure * surfmc::dot<double, 2>(frame.basis_gradients[i], frame.basis_gradients[j]);
        const double s_exact = (i == j) ? 1.0 : -1.0;
        worst = std::max(worst, std::abs(s - s_exact));
      }
  }
  {  // unit right triangle in R^3
    const std::array<surfmc::Vec<3>, 3> p{{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
    const auto frame = surfmc::element_frame(p);
    const auto& rule = surfmc::reference_quadrature<3>();
    const double stiff_exact[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double q = 0.0;
        for (int k = 0; k < rule.point_count; ++k)
          q += rule.weights[k] / rule.reference_measure * frame.measure * rule.barycentric[k][i] *
               rule.barycentric[k][j];
        const double mass_exact = (i == j ? 2.0 : 1.0) / 24.0;
        worst = std::max(worst, std::abs(q - mass_exact));
        const double s = frame.measure * surfmc::dot<double, 3>(frame.basis_gradients[i], frame.basis_gradients[j]);
        worst = std::max(worst, std::abs(s - stiff_exact[i][j]));
      }
  }
  expect(worst <= 1e-14, formatted("element matrix defect %.3g exceeds 1e-14", worst));
  return formatted("P1 mass/stiffness closed forms, max defect %.3g", worst);
}

template <class Case>
std::string check_stiffness_kernel(bool fault_negative_alpha) {
  constexpr int N = Case::ambient;
  const auto problem = surfmc::make_problem<Case>();
  const double t = 0.3;
  const surfmc::Sample y{0.3, -0.7};
  const auto mesh = surfmc::initial_mesh(problem.surface, 2);
  const auto cache = surfmc::build_geometry_cache(mesh, surfmc::vertices_at(mesh, problem.surface, t));
  surfmc::SparseMatrix s = surfmc::assemble_pattern(mesh);
  const double shift = fault_negative_alpha ? -10.0 : 0.0;
  surfmc::assemble_stiffness(
      cache, [&](const surfmc::Vec<N>& x) { return Case::coefficient(x, t, y) + shift; }, s);
  surfmc::Vector ones(s.n, 1.0), s1(s.n);
  s.multiply(ones, s1);
  double kernel = 0.0;
  for (const double v : s1) kernel = std::max(kernel, std::abs(v));
  const double scale = s.infinity_norm();
  expect(kernel <= 1e-12 * scale, formatted("||S 1||_inf = %.3g > 1e-12 * %.3g", kernel, scale));
  return formatted("||S 1||_inf = %.3g, ||S||_inf = %.3g", kernel, scale);
}

template <class Case>
std::string check_conservation(int level) {
  constexpr int N = Case::ambient;
  const auto problem = surfmc::make_problem<Case>();
  const auto mesh = surfmc::initial_mesh(problem.surface, level);
  const auto grid = surfmc::TimeGrid::from_steps(problem.surface.time_horizon(), 64);
  const auto levels = surfmc::precompute_time_levels(problem.surface, mesh, grid);
  surfmc::PathProblem<N> path;
  path.alpha = [](const surfmc::Vec<N>& x, double t, const surfmc::Sample& y) {
    return Case::coefficient(x, t, y);
  };
  path.rhs = [](const surfmc::Vec<N>&, double, const surfmc::Sample&) { return 0.0; };
  path.initial = [](const surfmc::Vec<N>& x, const surfmc::Sample&) { return 1.0 + x[0]; };
  path.options.cg_tol = 1e-10;
  const auto traj = surfmc::simulate_path(levels, path, surfmc::Sample{0.4, -0.9});
  const double mass0 = surfmc::total_mass(levels[0].mass, traj.states[0]);
  double drift = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k)
    drift = std::max(drift, std::abs(surfmc::total_mass(levels[k].mass, traj.states[k]) - mass0));
  const double rel = drift / std::max(1.0, std::abs(mass0));
  expect(rel <= 1e-6, formatted("relative mass drift %.3g exceeds 1e-6", rel));
  return formatted("f = 0, K = 64: measured relative drift %.3g (tolerance 1e-6)", rel);
}

template <class Case>
std::string check_residual_oracle(int points) {
  constexpr int N = Case::ambient;
  const auto problem = surfmc::make_problem<Case>(2.0);
  surfmc::SampleStream stream(surfmc::SeedSpec{1234}, 0, 0);
  double worst = 0.0;
  for (int i = 0; i < points; ++i) {
    surfmc::Vec<N> raw{};
    for (int d = 0; d < N; ++d) raw[d] = 2.0 * stream.next_symmetric();
    const double t = 0.05 + 1.9 * stream.next_uniform01();
    surfmc::Sample y(Case::sample_dim);
    for (auto& v : y) v = stream.next_symmetric();
    const auto x = problem.surface.project_to_surface(raw, t);
    const double ad = surfmc::rhs_ambient<Case>(x, t, y);
    const double fd = surfmc::rhs_ambient_fd<Case>(x, t, y);
    worst = std::max(worst, std::abs(ad - fd) / std::max(1.0, std::abs(ad)));
  }
  expect(worst <= 1e-6, formatted("AD vs FD relative mismatch %.3g exceeds 1e-6", worst));
  return formatted("%.0f random (x, t, Y): max relative mismatch %.3g", double(points), worst);
}

std::string check_sphere_eigenfunction() {
  const auto sphere = surfmc::unit_sphere();
  surfmc::SampleStream stream(surfmc::SeedSpec{99}, 0, 0);
  auto u = [](const auto& xs) { return xs[0]; };
  auto alpha = [](const auto& xs) {
    using S = std::decay_t<decltype(xs[0])>;
    (void)xs;
    return S(1.0);
  };
  auto phi = [](const auto& xs) { return xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2] - 1.0; };
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    surfmc::Vec<3> raw{};
    for (int d = 0; d < 3; ++d) raw[d] = 2.0 * stream.next_symmetric();
    const auto x = sphere.project_to_surface(raw, 0.0);
    const double lap = surfmc::tangential_diffusion_of<3>(u, alpha, phi, x);
    worst = std::max(worst, std::abs(-lap - 2.0 * x[0]));
  }
  expect(worst <= 1e-8, formatted("|(-Delta_Gamma x1) - 2 x1| = %.3g exceeds 1e-8", worst));
  return formatted("-Delta_Gamma x1 = 2 x1 on 100 sphere points, max defect %.3g", worst);
}

int run_verify(const std::string& fault) {
  const bool fault_alpha = fault == "alpha-negative";
  Verifier v;
  v.check("quadrature-exactness", [] { return check_quadrature(); });
  v.check("element-matrices", [] { return check_element_matrices(); });
  v.check("stiffness-kernel-ellipse2d", [&] { return check_stiffness_kernel<surfmc::EllipseCase>(fault_alpha); });
  v.check("stiffness-kernel-ellipsoid3d", [&] { return check_stiffness_kernel<surfmc::EllipsoidCase>(fault_alpha); });
  v.check("mass-conservation-ellipse2d", [] { return check_conservation<surfmc::EllipseCase>(3); });
  v.check("mass-conservation-ellipsoid3d", [] { return check_conservation<surfmc::EllipsoidCase>(1); });
  v.check("residual-oracle-ellipse2d", [] { return check_residual_oracle<surfmc::EllipseCase>(200); });
  v.check("residual-oracle-ellipsoid3d", [] { return check_residual_oracle<surfmc::EllipsoidCase>(200); });
  v.check("sphere-eigenfunction", [] { return check_sphere_eigenfunction(); });
  return v.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surfmc: finite elements on evolving surfaces with random diffusion coefficients"};
  app.require_subcommand(1);

  surfmc::RunConfig cfg;
  auto* run = app.add_subcommand("run", "Run a Monte-Carlo convergence study and emit tables");
  run->add_option("--experiment", cfg.experiment, "Preset problem: ellipse2d | ellipsoid3d")
      ->check(CLI::IsMember({"ellipse2d", "ellipsoid3d"}))
      ->capture_default_str();
  run->add_option("--levels", cfg.levels, "Finest refinement level (runs levels 0..levels)")->capture_default_str();
  run->add_option("--tau0", cfg.tau0, "Time step at level 0")->capture_default_str();
  run->add_option("--m0", cfg.m0, "Monte-Carlo samples at level 0")->capture_default_str();
  run->add_option("--tau-refine", cfg.tau_refine, "Time-step refinement factor per level")->capture_default_str();
  run->add_option("--m-growth", cfg.m_growth, "Sample growth factor per level")->capture_default_str();
  run->add_option("--replicates", cfg.replicates, "Independent replicates per level")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Master seed (env: SURFMC_SEED)")->capture_default_str();
  run->add_option("--tol", cfg.tol, "CG relative residual tolerance")->capture_default_str();
  run->add_option("--workers", cfg.workers, "Worker threads, 0 = hardware (env: SURFMC_WORKERS)")
      ->capture_default_str();
  run->add_option("--horizon", cfg.horizon, "Final time T")->capture_default_str();
  run->add_option("--out-csv", cfg.out_csv, "Write the result table as CSV");
  run->add_option("--out-md", cfg.out_md, "Write the result table as markdown");
  run->add_option("--mesh-dump", cfg.mesh_dump, "Directory for per-level OFF dumps of the initial meshes");
  run->add_flag("--generic-path,!--affine-path", [&cfg](std::int64_t count) { cfg.affine_path = count <= 0; },
                "Force the per-sample assembly engine instead of the precomputed affine basis");
  std::string config_path;
  run->add_option("--config", config_path, "Flat key=value config file; flags take precedence");

  std::string fault = "none";
  auto* verify = app.add_subcommand("verify", "Run the fast self-check suite");
  verify->add_option("--fault", fault, "Inject a fault to demonstrate detection: alpha-negative")
      ->check(CLI::IsMember({"none", "alpha-negative"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!config_path.empty()) apply_config_file(argc, argv, config_path, cfg);
      apply_env_overrides(argc, argv, cfg);
      surfmc::validate(cfg);
      return run_study(cfg);
    }
    return run_verify(fault);
  } catch (const surfmc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
