// cpnt.hpp
// Umbrella header.

#pragma once

#include "cpnt/checkpoint.hpp"
#include "cpnt/core.hpp"
#include "cpnt/counting.hpp"
#include "cpnt/density.hpp"
#include "cpnt/explicit_formula.hpp"
#include "cpnt/factor_sieve.hpp"
#include "cpnt/lfunc.hpp"
#include "cpnt/parallel.hpp"
#include "cpnt/plot.hpp"
#include "cpnt/specfun.hpp"
#include "cpnt/summatory.hpp"
