#pragma once

#include "znn/activation.hpp"
#include "znn/analysis.hpp"
#include "znn/complex_model.hpp"
#include "znn/core.hpp"
#include "znn/discretize.hpp"
#include "znn/evolution.hpp"
#include "znn/expression.hpp"
#include "znn/model.hpp"
#include "znn/noise.hpp"
#include "znn/operator.hpp"
#include "znn/positioning.hpp"
#include "znn/problem.hpp"
#include "znn/projection.hpp"
#include "znn/reference.hpp"
#include "znn/synthetic.hpp"
#include "znn/trajectory.hpp"

namespace znn {
inline constexpr const char* kVersion = "0.1.0";
}
