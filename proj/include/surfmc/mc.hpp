#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "surfmc/errors.hpp"
#include "surfmc/parallel.hpp"
#include "surfmc/stepper.hpp"

// Monte-Carlo layer: replicated sample averages of the discrete solution
// fields, errors against the expected solution, experimental orders of
// convergence and the emitted tables.
//
// Reproducibility contract: samples are pure functions of (seed, replicate,
// sample index), and within a replicate the per-sample fields are accumulated
// strictly in sample order (workers fill a bounded block of trajectories in
// parallel, the reduction then walks the block serially).  Results are
// bit-identical for any worker count.

namespace surfmc {

// --- single replicate --------------------------------------------------------

struct ReplicateResult {
  std::vector<Vector> mean_states;   // sample average of U^k, k = 0..K
  std::vector<double> step_errors;   // || E[u](.,t_k) - mean field ||_{L2(Gamma_h(t_k))}
  double error = 0.0;                // max over k (k = 0 included)
  PathStats stats;
};

template <int N>
ReplicateResult run_replicate(const std::vector<AssembledLevel<N>>& levels,
                              const std::function<PathTrajectory(const Sample&)>& solve_path,
                              const std::function<Sample(long)>& sample_at, long sample_count,
                              const std::function<double(const Vec<N>&, double)>& expected, int workers) {
  if (sample_count < 1) throw Error("a replicate needs at least one sample");
  const int n = levels[0].mass.n;
  const std::size_t time_count = levels.size();

  ReplicateResult result;
  result.mean_states.assign(time_count, Vector(n, 0.0));

  // Fixed block size, independent of the worker count, so that the summation
  // order (and therefore the floating-point result) never changes.
  constexpr long kBlock = 32;
  std::vector<PathTrajectory> block(std::min<long>(kBlock, sample_count));
  for (long start = 0; start < sample_count; start += kBlock) {
    const long count = std::min(kBlock, sample_count - start);
    parallel_for(count, workers, [&](long j) { block[j] = solve_path(sample_at(start + j)); });
    for (long j = 0; j < count; ++j) {
      for (std::size_t k = 0; k < time_count; ++k) vec_axpy(1.0, block[j].states[k], result.mean_states[k]);
      result.stats.absorb(block[j].stats);
      block[j] = PathTrajectory{};  // release the trajectory memory early
    }
  }

  const double inv_m = 1.0 / static_cast<double>(sample_count);
  result.step_errors.resize(time_count);
  for (std::size_t k = 0; k < time_count; ++k) {
    for (auto& v : result.mean_states[k]) v *= inv_m;
    const double t = levels[k].t;
    result.step_errors[k] =
        l2_error(levels[k].geometry, [&](const Vec<N>& x) { return expected(x, t); }, result.mean_states[k]);
    result.error = std::max(result.error, result.step_errors[k]);
  }
  return result;
}

// RMS aggregation of the per-replicate errors.
inline double mc_error(const std::vector<double>& replicate_errors) {
  if (replicate_errors.empty()) throw Error("mc_error needs at least one replicate");
  double acc = 0.0;
  for (const double e : replicate_errors) acc += e * e;
  return std::sqrt(acc / static_cast<double>(replicate_errors.size()));
}

// Experimental order of convergence between two (error, parameter) pairs.
inline double eoc(double error_new, double error_old, double param_new, double param_old) {
  return std::log(error_new / error_old) / std::log(param_new / param_old);
}

// --- convergence study -------------------------------------------------------

// Round to `digits` significant decimal digits (exactly what the emitters
// print, so stored rows, emitted tables and re-parsed tables all agree).
inline double round_sig(double v, int digits = 6) {
  if (!std::isfinite(v)) return v;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

struct StudySchedule {
  int level = 0;        // mesh refinement level
  double tau = 1.0;     // time step
  long samples = 1;     // Monte-Carlo samples per replicate
};

// The paper's coupling: tau_j = tau_0 / 4^j, M_j = M_0 * 16^j on levels 0..L.
inline std::vector<StudySchedule> coupled_schedule(int max_level, double tau0, long m0,
                                                   double tau_refine = 4.0, long m_growth = 16) {
  std::vector<StudySchedule> s;
  double tau = tau0;
  long m = m0;
  for (int l = 0; l <= max_level; ++l) {
    s.push_back({l, tau, m});
    tau /= tau_refine;
    m *= m_growth;
  }
  return s;
}

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  long samples = 0;
  double tau = 0.0;
  double error = 0.0;
  // EOCs against the previous row; NaN where undefined (first row, or a
  // parameter that did not change).
  double eoc_h = std::numeric_limits<double>::quiet_NaN();
  double eoc_samples = std::numeric_limits<double>::quiet_NaN();
  double eoc_tau = std::numeric_limits<double>::quiet_NaN();
};

struct StudyOptions {
  int replicates = 20;
  SeedSpec seed{};
  StepperOptions stepper{};
  int workers = 1;
  bool use_affine = true;  // precomputed-basis path for affine-in-sample problems
  std::function<void(const std::string&)> progress;
};

struct StudyResult {
  std::vector<ConvergenceRow> rows;
  PathStats stats;
  std::vector<double> level_seconds;
};

namespace detail {

inline void fill_eocs(std::vector<ConvergenceRow>& rows) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& prev = rows[i - 1];
    auto& row = rows[i];
    row.eoc_h = row.h != prev.h ? round_sig(eoc(row.error, prev.error, row.h, prev.h)) : nan;
    row.eoc_samples =
        row.samples != prev.samples
            ? round_sig(eoc(row.error, prev.error, static_cast<double>(row.samples), static_cast<double>(prev.samples)))
            : nan;
    row.eoc_tau = row.tau != prev.tau ? round_sig(eoc(row.error, prev.error, row.tau, prev.tau)) : nan;
  }
}

}  // namespace detail

template <int N>
StudyResult convergence_study(const ManufacturedProblem<N>& problem, const std::vector<StudySchedule>& schedule,
                              const StudyOptions& options) {
  if (options.replicates < 1) throw Error("study needs at least one replicate");
  StudyResult result;
  for (const auto& entry : schedule) {
    const auto started = std::chrono::steady_clock::now();
    const TimeGrid grid = TimeGrid::from_tau(problem.surface.time_horizon(), entry.tau);
    const SurfaceMesh<N> mesh = initial_mesh(problem.surface, entry.level);
    const auto levels = precompute_time_levels(problem.surface, mesh, grid);

    std::vector<double> times(grid.steps + 1);
    for (int k = 0; k <= grid.steps; ++k) times[k] = grid.time(k);
    const double h = mesh_size(mesh, problem.surface, times);

    // Pick the sample-path engine.
    AffineExpansion<N> expansion;
    PathProblem<N> generic;
    std::function<PathTrajectory(const Sample&)> solve_path;
    if (options.use_affine && problem.affine_in_sample) {
      expansion = build_affine_expansion(levels, problem, options.stepper);
      solve_path = [&](const Sample& y) { return simulate_path_affine(levels, expansion, y); };
    } else {
      generic = make_path_problem(problem, options.stepper);
      solve_path = [&](const Sample& y) { return simulate_path(levels, generic, y); };
    }

    std::vector<double> replicate_errors;
    replicate_errors.reserve(options.replicates);
    PathStats stats;
    for (int r = 0; r < options.replicates; ++r) {
      const auto sample_at = [&, r](long i) { return draw_sample(options.seed, r, i, problem.sample_dim); };
      const ReplicateResult rep =
          run_replicate<N>(levels, solve_path, sample_at, entry.samples, problem.expected, options.workers);
      replicate_errors.push_back(rep.error);
      stats.absorb(rep.stats);
    }

    ConvergenceRow row;
    row.level = entry.level;
    row.h = round_sig(h);
    row.samples = entry.samples;
    row.tau = round_sig(entry.tau);
    row.error = round_sig(mc_error(replicate_errors));
    result.rows.push_back(row);
    result.stats.absorb(stats);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.level_seconds.push_back(seconds);
    if (options.progress) {
      char line[160];
      std::snprintf(line, sizeof line, "level %d: h=%g M=%ld tau=%g error=%g (%.1fs, %ld solves)", entry.level,
                    row.h, entry.samples, row.tau, row.error, seconds, stats.solves);
      options.progress(line);
    }
  }
  detail::fill_eocs(result.rows);
  return result;
}

// --- emitted tables ----------------------------------------------------------

inline std::string format_sig(double v, int digits = 6) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline void write_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "level,h,M,tau,error,eoc_h,eoc_M,eoc_tau\n";
  for (const auto& r : rows) {
    os << r.level << ',' << format_sig(r.h) << ',' << r.samples << ',' << format_sig(r.tau) << ','
       << format_sig(r.error) << ',' << format_sig(r.eoc_h) << ',' << format_sig(r.eoc_samples) << ','
       << format_sig(r.eoc_tau) << '\n';
  }
}

inline std::string csv_string(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  write_csv(os, rows);
  return os.str();
}

inline std::vector<ConvergenceRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "level,h,M,tau,error,eoc_h,eoc_M,eoc_tau")
    throw Error("unrecognised convergence-table CSV header");
  const auto to_double = [](const std::string& field) {
    return field.empty() ? std::numeric_limits<double>::quiet_NaN() : std::strtod(field.c_str(), nullptr);
  };
  std::vector<ConvergenceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    while (fields.size() < 8) fields.emplace_back();  // trailing empty cells
    ConvergenceRow r;
    r.level = std::atoi(fields[0].c_str());
    r.h = to_double(fields[1]);
    r.samples = std::atol(fields[2].c_str());
    r.tau = to_double(fields[3]);
    r.error = to_double(fields[4]);
    r.eoc_h = to_double(fields[5]);
    r.eoc_samples = to_double(fields[6]);
    r.eoc_tau = to_double(fields[7]);
    rows.push_back(r);
  }
  return rows;
}

inline void write_markdown(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  const auto cell = [](double v) { return std::isnan(v) ? std::string("-") : format_sig(v); };
  os << "| level | h | M | tau | error | eoc(h) | eoc(M) | eoc(tau) |\n";
  os << "|------:|--:|--:|----:|------:|-------:|-------:|---------:|\n";
  for (const auto& r : rows) {
    os << "| " << r.level << " | " << format_sig(r.h) << " | " << r.samples << " | " << format_sig(r.tau) << " | "
       << format_sig(r.error) << " | " << cell(r.eoc_h) << " | " << cell(r.eoc_samples) << " | " << cell(r.eoc_tau)
       << " |\n";
  }
}

}  // namespace surfmc
