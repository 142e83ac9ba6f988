#pragma once

#include "mzsense/errors.hpp"

namespace mzsense::numerics {

/// Second-order central stencil for the first or second derivative.
/// Only used to cross-check analytic derivatives.
template <class F>
double central_difference(F&& f, double x, int order, double step) {
    if (!(step > 0.0)) throw DomainError("central_difference: step must be > 0");
    switch (order) {
        case 1:
            return (f(x + step) - f(x - step)) / (2.0 * step);
        case 2:
            return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
        default:
            throw DomainError("central_difference: order must be 1 or 2");
    }
}

}  // namespace mzsense::numerics
