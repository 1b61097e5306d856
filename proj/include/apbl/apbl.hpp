#pragma once

// Umbrella header.

#include "apbl/error.hpp"
#include "apbl/vquad.hpp"
#include "apbl/collision.hpp"
#include "apbl/grid_state.hpp"
#include "apbl/kernel_table.hpp"
#include "apbl/scheme_common.hpp"
#include "apbl/scheme_naive.hpp"
#include "apbl/scheme_lme.hpp"
#include "apbl/reference.hpp"
#include "apbl/chandrasekhar.hpp"
#include "apbl/runner.hpp"
