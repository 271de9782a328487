#pragma once

#include "riccati/csv.hpp"
#include "riccati/errors.hpp"
#include "riccati/expr.hpp"
#include "riccati/factors.hpp"
#include "riccati/grid.hpp"
#include "riccati/linear2.hpp"
#include "riccati/reference.hpp"
#include "riccati/solver.hpp"
