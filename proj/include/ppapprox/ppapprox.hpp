#pragma once

#include "assignment.hpp"
#include "bounds.hpp"
#include "config.hpp"
#include "density.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "lrdtest.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "pattern.hpp"
#include "pattern_io.hpp"
#include "quadrature.hpp"
#include "random.hpp"
#include "rates.hpp"
#include "stein.hpp"
