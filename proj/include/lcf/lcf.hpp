#pragma once

#include "lcf/asplund.hpp"
#include "lcf/functionals.hpp"
#include "lcf/grid.hpp"
#include "lcf/inequalities.hpp"
#include "lcf/io.hpp"
#include "lcf/legendre.hpp"
#include "lcf/maxaffine.hpp"
#include "lcf/minkowski.hpp"
#include "lcf/report.hpp"
#include "lcf/variation.hpp"
