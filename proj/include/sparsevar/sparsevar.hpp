#pragma once

#include "sparsevar/analysis.hpp"
#include "sparsevar/csv.hpp"
#include "sparsevar/cv.hpp"
#include "sparsevar/grid.hpp"
#include "sparsevar/lag.hpp"
#include "sparsevar/least_squares.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/penalties.hpp"
#include "sparsevar/refit.hpp"
#include "sparsevar/simulate.hpp"
#include "sparsevar/solvers.hpp"
#include "sparsevar/svg.hpp"
#include "sparsevar/types.hpp"
