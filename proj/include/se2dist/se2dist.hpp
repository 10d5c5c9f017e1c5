#ifndef SE2DIST_SE2DIST_HPP_INCLUDED
#define SE2DIST_SE2DIST_HPP_INCLUDED

#include "se2dist/se2_core.hpp"
#include "se2dist/metric.hpp"
#include "se2dist/approx.hpp"
#include "se2dist/grid.hpp"
#include "se2dist/eikonal.hpp"
#include "se2dist/morphology.hpp"
#include "se2dist/analysis.hpp"

#endif  // SE2DIST_SE2DIST_HPP_INCLUDED
