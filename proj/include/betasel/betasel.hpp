#pragma once

// Umbrella header: varying-dispersion beta regression, bootstrap model
// selection criteria, Monte Carlo selection experiments, diagnostics.

#include "betasel/criteria.hpp"
#include "betasel/csv.hpp"
#include "betasel/data.hpp"
#include "betasel/diagnostics.hpp"
#include "betasel/driver.hpp"
#include "betasel/error.hpp"
#include "betasel/fit.hpp"
#include "betasel/link.hpp"
#include "betasel/model.hpp"
#include "betasel/report.hpp"
#include "betasel/rng.hpp"
#include "betasel/selection.hpp"
#include "betasel/simulation.hpp"
#include "betasel/special.hpp"
