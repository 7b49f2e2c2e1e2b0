#pragma once

#include "qstpi/errors.hpp"
#include "qstpi/types.hpp"
#include "qstpi/instance.hpp"
#include "qstpi/wake.hpp"
#include "qstpi/graph.hpp"
#include "qstpi/problem.hpp"
#include "qstpi/routing.hpp"
#include "qstpi/search.hpp"
#include "qstpi/bounds.hpp"
#include "qstpi/solution.hpp"
#include "qstpi/heuristics.hpp"
#include "qstpi/solver.hpp"
#include "qstpi/validate.hpp"
#include "qstpi/experiments.hpp"
#include "qstpi/lp_export.hpp"
