#pragma once

// Umbrella header: the whole toolkit in one include.

#include "numcore.hpp"
#include "prox.hpp"
#include "alfn.hpp"
#include "subsolve.hpp"
#include "alm.hpp"
#include "variants.hpp"
#include "problems.hpp"
#include "oracles.hpp"
#include "bench.hpp"
