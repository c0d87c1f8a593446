#pragma once

// Umbrella header for the surfmc library: evolving-surface finite elements
// with random diffusion coefficients and Monte-Carlo convergence studies.

#include "surfmc/config.hpp"
#include "surfmc/dual.hpp"
#include "surfmc/errors.hpp"
#include "surfmc/fem.hpp"
#include "surfmc/geometry.hpp"
#include "surfmc/linalg.hpp"
#include "surfmc/manufactured.hpp"
#include "surfmc/mc.hpp"
#include "surfmc/mesh.hpp"
#include "surfmc/oracles.hpp"
#include "surfmc/parallel.hpp"
#include "surfmc/point.hpp"
#include "surfmc/quadrature.hpp"
#include "surfmc/stepper.hpp"
#include "surfmc/stochastic.hpp"
