#pragma once

// Least-squares fits used by the peak-width scaling study: a log-log
// power law y = a / x^b and a three-parameter Gaussian.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mzsense/errors.hpp"

namespace mzsense::numerics {

struct Point {
    double x;
    double y;
};

struct PowerLaw {
    double prefactor;  ///< a
    double exponent;   ///< b, with y = a / x^b
};

/// Closed-form least squares on log y = log a - b log x.
/// Needs at least two distinct abscissae.
inline PowerLaw power_law_fit(std::span<const Point> points) {
    if (points.size() < 2) throw DomainError("power_law_fit: need at least 2 points");
    double mean_lx = 0.0;
    double mean_ly = 0.0;
    for (const auto& p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0)) {
            throw DomainError("power_law_fit: x and y must be positive");
        }
        mean_lx += std::log(p.x);
        mean_ly += std::log(p.y);
    }
    const double n = static_cast<double>(points.size());
    mean_lx /= n;
    mean_ly /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.x) - mean_lx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.y) - mean_ly);
    }
    if (!(sxx > 1e-300)) throw DomainError("power_law_fit: all x values coincide");
    const double slope = sxy / sxx;
    return PowerLaw{std::exp(mean_ly - slope * mean_lx), -slope};
}

struct GaussianParams {
    double amplitude;
    double center;
    double width;
};

struct GaussianFitResult {
    double amplitude;
    double center;
    double width;
    double rms_residual;
    int iterations;
};

inline double gaussian_model(const GaussianParams& p, double x) {
    const double u = (x - p.center) / p.width;
    return p.amplitude * std::exp(-0.5 * u * u);
}

/// Levenberg-Marquardt fit of A exp[-(x-c)^2 / (2 w^2)].
/// Stops when the parameter step falls below 1e-10 or after 200 iterations.
inline GaussianFitResult nonlinear_gaussian_fit(std::span<const Point> points,
                                                GaussianParams init) {
    if (points.size() < 5) throw DomainError("gaussian fit: need at least 5 points");
    if (!(init.width > 0.0)) throw DomainError("gaussian fit: initial width must be > 0");

    const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                              [](const Point& a, const Point& b) { return a.y < b.y; });
    const double scale = std::max(std::abs(lo->y), std::abs(hi->y));
    if (!(hi->y - lo->y > 1e-12 * scale)) {
        throw FitFailure("gaussian fit: data is flat, parameters are not identifiable");
    }

    auto cost = [&](const GaussianParams& p) {
        double s = 0.0;
        for (const auto& pt : points) {
            const double r = gaussian_model(p, pt.x) - pt.y;
            s += r * r;
        }
        return s;
    };

    GaussianParams p = init;
    double current = cost(p);
    double lambda = 1e-3;
    int iter = 0;
    for (; iter < 200; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (const auto& pt : points) {
            const double d = pt.x - p.center;
            const double g = std::exp(-0.5 * d * d / (p.width * p.width));
            const double r = p.amplitude * g - pt.y;
            Eigen::Vector3d j(g, p.amplitude * g * d / (p.width * p.width),
                              p.amplitude * g * d * d / (p.width * p.width * p.width));
            jtj += j * j.transpose();
            jtr += j * r;
        }
        const Eigen::Vector3d diag = jtj.diagonal();
        if (diag.minCoeff() <= 1e-300 * std::max(1.0, diag.maxCoeff())) {
            throw FitFailure("gaussian fit: singular normal equations");
        }

        bool accepted = false;
        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        while (lambda < 1e16) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * diag;
            Eigen::LDLT<Eigen::Matrix3d> ldlt(damped);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
                throw FitFailure("gaussian fit: singular normal equations");
            }
            step = ldlt.solve(-jtr);
            GaussianParams trial{p.amplitude + step[0], p.center + step[1], p.width + step[2]};
            if (trial.width > 0.0 && std::isfinite(trial.amplitude) && std::isfinite(trial.center)) {
                const double c = cost(trial);
                if (c <= current) {
                    p = trial;
                    current = c;
                    lambda = std::max(lambda * 0.1, 1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted) break;  // no descent direction left: at a minimum to working precision
        if (step.norm() < 1e-10) {
            ++iter;
            break;
        }
    }
    if (!(p.width > 0.0) || !std::isfinite(p.width) || !std::isfinite(p.amplitude)) {
        throw FitFailure("gaussian fit: diverged");
    }
    return GaussianFitResult{p.amplitude, p.center, p.width,
                             std::sqrt(current / static_cast<double>(points.size())), iter};
}

}  // namespace mzsense::numerics
