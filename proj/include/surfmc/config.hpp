#pragma once

#include <cstdint>
#include <string>

#include "surfmc/errors.hpp"
#include "surfmc/mc.hpp"

// Run configuration shared by the CLI and tests.  Parsing (flags, flat
// key-value config file, environment overrides) happens in the CLI; this
// header owns the value set and its validation so both sides agree.

namespace surfmc {

struct RunConfig {
  std::string experiment = "ellipse2d";  // ellipse2d | ellipsoid3d
  int levels = 3;                        // study runs refinement levels 0..levels
  double tau0 = 1.0;
  long m0 = 1;
  double tau_refine = 4.0;  // tau_{j+1} = tau_j / tau_refine
  long m_growth = 16;       // M_{j+1} = M_j * m_growth
  int replicates = 20;
  std::uint64_t seed = 0;
  double tol = 1e-8;  // CG relative residual
  int workers = 0;    // 0 = hardware concurrency
  double horizon = 1.0;
  bool affine_path = true;  // precomputed-basis sample engine for the presets
  std::string out_csv;
  std::string out_md;
  std::string mesh_dump;  // directory for per-level OFF dumps (empty = off)
};

inline void validate(const RunConfig& c) {
  if (c.experiment != "ellipse2d" && c.experiment != "ellipsoid3d")
    throw ConfigError("experiment", "must be ellipse2d or ellipsoid3d, got '" + c.experiment + "'");
  if (c.levels < 0 || c.levels > 10) throw ConfigError("levels", "must be in [0, 10]");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon", "must be positive");
  if (!(c.tau0 > 0.0) || c.tau0 > c.horizon) throw ConfigError("tau0", "must be in (0, horizon]");
  if (c.m0 < 1) throw ConfigError("m0", "must be at least 1");
  if (!(c.tau_refine >= 1.0)) throw ConfigError("tau-refine", "must be >= 1");
  if (c.m_growth < 1) throw ConfigError("m-growth", "must be >= 1");
  if (c.replicates < 1) throw ConfigError("replicates", "must be at least 1");
  if (!(c.tol > 0.0) || c.tol >= 1.0) throw ConfigError("tol", "must be in (0, 1)");
  if (c.workers < 0) throw ConfigError("workers", "must be >= 0 (0 = auto)");
}

inline StudyOptions study_options(const RunConfig& c, unsigned hardware_workers) {
  validate(c);
  StudyOptions o;
  o.replicates = c.replicates;
  o.seed = SeedSpec{c.seed};
  o.stepper.cg_tol = c.tol;
  o.workers = c.workers > 0 ? c.workers : static_cast<int>(hardware_workers ? hardware_workers : 1u);
  o.use_affine = c.affine_path;
  return o;
}

}  // namespace surfmc
