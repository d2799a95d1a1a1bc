#pragma once

// Umbrella header: ensembles of smooth regret-matching agents on population
// network games, the matching moment-closure ODE model, and quantal response
// equilibrium solvers.

#include "pngdyn/abm.hpp"
#include "pngdyn/csv.hpp"
#include "pngdyn/error.hpp"
#include "pngdyn/experiment.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/gamefile.hpp"
#include "pngdyn/matrix.hpp"
#include "pngdyn/network.hpp"
#include "pngdyn/ode.hpp"
#include "pngdyn/policy.hpp"
#include "pngdyn/qre.hpp"
#include "pngdyn/rng.hpp"
#include "pngdyn/svg.hpp"
