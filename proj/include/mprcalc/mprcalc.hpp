#pragma once

#include "mprcalc/aoi.hpp"
#include "mprcalc/channel.hpp"
#include "mprcalc/errors.hpp"
#include "mprcalc/explore.hpp"
#include "mprcalc/incomplete_gamma.hpp"
#include "mprcalc/rng.hpp"
#include "mprcalc/sim.hpp"
#include "mprcalc/snc.hpp"
