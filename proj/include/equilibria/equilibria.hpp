#pragma once

#include "equilibria/error.hpp"
#include "equilibria/rational.hpp"
#include "equilibria/linalg.hpp"
#include "equilibria/lp.hpp"
#include "equilibria/geometry.hpp"
#include "equilibria/potential.hpp"
#include "equilibria/interval.hpp"
#include "equilibria/polynomial.hpp"
#include "equilibria/parallel.hpp"
#include "equilibria/voronoi.hpp"
#include "equilibria/solver.hpp"
#include "equilibria/bounds.hpp"
#include "equilibria/bivariate.hpp"
#include "equilibria/threecharge.hpp"
