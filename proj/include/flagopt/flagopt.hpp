#pragma once

#include "flagopt/baselines.hpp"
#include "flagopt/bench.hpp"
#include "flagopt/bisection.hpp"
#include "flagopt/feasible_set.hpp"
#include "flagopt/flag.hpp"
#include "flagopt/generators.hpp"
#include "flagopt/lemma_checks.hpp"
#include "flagopt/problem.hpp"
#include "flagopt/prox.hpp"
#include "flagopt/rate_fit.hpp"
#include "flagopt/reference.hpp"
#include "flagopt/trace.hpp"
#include "flagopt/types.hpp"
