#pragma once

#include "eqcheck/error.hpp"
#include "eqcheck/tensor.hpp"
#include "eqcheck/jet.hpp"
#include "eqcheck/expr.hpp"
#include "eqcheck/manifold.hpp"
#include "eqcheck/curvature.hpp"
#include "eqcheck/classify.hpp"
#include "eqcheck/fieldprops.hpp"
#include "eqcheck/soliton.hpp"
#include "eqcheck/parallel.hpp"
#include "eqcheck/report.hpp"
#include "eqcheck/suites.hpp"
