#pragma once

#include "mzsense/errors.hpp"
#include "mzsense/fidelity.hpp"
#include "mzsense/inference.hpp"
#include "mzsense/linear_optics.hpp"
#include "mzsense/numerics/finite_difference.hpp"
#include "mzsense/numerics/fit.hpp"
#include "mzsense/numerics/quadrature.hpp"
#include "mzsense/priors.hpp"
#include "mzsense/sweep.hpp"
