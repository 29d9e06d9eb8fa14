#pragma once

#include "dapro/errors.hpp"
#include "dapro/rng.hpp"
#include "dapro/sim_engine.hpp"
#include "dapro/survival_calibration.hpp"
#include "dapro/isotonic.hpp"
#include "dapro/allocation.hpp"
#include "dapro/alloc_static.hpp"
#include "dapro/alloc_dapro.hpp"
#include "dapro/alloc_variants.hpp"
#include "dapro/estimators_bounds.hpp"
#include "dapro/config.hpp"
#include "dapro/harness.hpp"
