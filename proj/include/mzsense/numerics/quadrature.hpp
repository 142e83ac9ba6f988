#pragma once

// Composite Gauss-Legendre quadrature with panel doubling.
//
// A Partition is a sorted list of cell edges (uniform base panels merged
// with caller-supplied breakpoints such as kinks of a tabulated prior).
// Refinement level r splits every cell into 2^r equal panels and applies
// the same n-point Gauss-Legendre rule on each.  The node set at each
// level is fixed, so results do not depend on evaluation order.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mzsense/errors.hpp"

namespace mzsense::numerics {

struct QuadratureConfig {
    int base_panels = 16;
    int nodes_per_panel = 32;
    int max_refinements = 6;
    double abs_tol = 1e-10;

    void validate() const {
        if (base_panels < 4) throw DomainError("quadrature: base_panels must be >= 4");
        if (nodes_per_panel < 8) throw DomainError("quadrature: nodes_per_panel must be >= 8");
        if (max_refinements < 1) throw DomainError("quadrature: max_refinements must be >= 1");
        if (!(abs_tol > 0.0)) throw DomainError("quadrature: abs_tol must be > 0");
    }

    /// Same rule with twice as many base panels.
    QuadratureConfig doubled() const {
        QuadratureConfig c = *this;
        c.base_panels *= 2;
        return c;
    }
};

/// Nodes and weights of the n-point rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

/// Deterministic pairwise summation.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t mid = v.size() / 2;
    return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

struct Partition {
    std::vector<double> edges;

    double lo() const { return edges.front(); }
    double hi() const { return edges.back(); }
    std::size_t cells() const { return edges.size() - 1; }
};

/// Uniform panels on [lo, hi] merged with breakpoints strictly inside it.
inline Partition make_partition(double lo, double hi, int base_panels,
                                std::span<const double> breakpoints = {}) {
    if (!(hi > lo)) throw DomainError("quadrature: empty integration interval");
    std::vector<double> edges;
    edges.reserve(base_panels + 1 + breakpoints.size());
    for (int i = 0; i <= base_panels; ++i) {
        edges.push_back(i == base_panels ? hi : lo + (hi - lo) * i / base_panels);
    }
    for (double b : breakpoints) {
        if (b > lo && b < hi) edges.push_back(b);
    }
    std::sort(edges.begin(), edges.end());
    const double merge_tol = 1e-12 * (hi - lo);
    std::vector<double> unique;
    unique.reserve(edges.size());
    for (double e : edges) {
        if (unique.empty() || e - unique.back() > merge_tol) {
            unique.push_back(e);
        } else if (e == hi) {
            unique.back() = hi;
        }
    }
    return Partition{std::move(unique)};
}

/// Flattened nodes and weights for one refinement level.
struct CompositeRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline CompositeRule composite_rule(const Partition& partition, int level,
                                    const GaussLegendreRule& gl) {
    const std::size_t split = std::size_t{1} << level;
    CompositeRule rule;
    const std::size_t total = partition.cells() * split * gl.nodes.size();
    rule.nodes.reserve(total);
    rule.weights.reserve(total);
    for (std::size_t c = 0; c < partition.cells(); ++c) {
        const double a = partition.edges[c];
        const double b = partition.edges[c + 1];
        const double h = (b - a) / static_cast<double>(split);
        for (std::size_t s = 0; s < split; ++s) {
            const double pa = a + h * static_cast<double>(s);
            const double mid = pa + 0.5 * h;
            for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
                rule.nodes.push_back(mid + 0.5 * h * gl.nodes[k]);
                rule.weights.push_back(0.5 * h * gl.weights[k]);
            }
        }
    }
    return rule;
}

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int levels = 0;  ///< refinement levels evaluated (>= 2)
    bool converged = false;
    std::vector<double> history;  ///< value at each level
};

/// Runs levels 0, 1, ... until successive values differ by less than
/// abs_tol or max_refinements is reached.  `level_value` maps a
/// CompositeRule to the quantity being integrated.
template <class LevelFn>
QuadratureResult refine(const Partition& partition, const QuadratureConfig& config,
                        LevelFn&& level_value) {
    config.validate();
    const GaussLegendreRule gl = gauss_legendre(config.nodes_per_panel);
    QuadratureResult out;
    double previous = 0.0;
    for (int level = 0; level <= config.max_refinements; ++level) {
        const double value = level_value(composite_rule(partition, level, gl));
        out.history.push_back(value);
        out.levels = level + 1;
        out.value = value;
        if (level > 0) {
            out.error_estimate = std::abs(value - previous);
            if (out.error_estimate < config.abs_tol) {
                out.converged = true;
                return out;
            }
        }
        previous = value;
    }
    return out;
}

struct VectorQuadratureResult {
    std::vector<double> values;
    double error_estimate = 0.0;
    int levels = 0;
    bool converged = false;
    std::vector<double> error_history;  ///< error measure after each level >= 1
};

/// Vector-valued counterpart of refine().  `distance(previous, current)`
/// measures the change between levels; by default the largest componentwise
/// difference.
template <class LevelFn, class Distance>
VectorQuadratureResult refine_vector(const Partition& partition, const QuadratureConfig& config,
                                     LevelFn&& level_values, Distance&& distance) {
    config.validate();
    const GaussLegendreRule gl = gauss_legendre(config.nodes_per_panel);
    VectorQuadratureResult out;
    std::vector<double> previous;
    for (int level = 0; level <= config.max_refinements; ++level) {
        std::vector<double> values = level_values(composite_rule(partition, level, gl));
        out.levels = level + 1;
        if (level > 0) {
            out.error_estimate = distance(previous, values);
            out.error_history.push_back(out.error_estimate);
            if (out.error_estimate < config.abs_tol) {
                out.values = std::move(values);
                out.converged = true;
                return out;
            }
        }
        previous = std::move(values);
    }
    out.values = std::move(previous);
    return out;
}

inline double max_abs_difference(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

template <class LevelFn>
VectorQuadratureResult refine_vector(const Partition& partition, const QuadratureConfig& config,
                                     LevelFn&& level_values) {
    return refine_vector(partition, config, std::forward<LevelFn>(level_values), max_abs_difference);
}

/// Returns the value of a converged result, otherwise throws with the best estimate.
inline QuadratureResult require_converged(QuadratureResult r, const std::string& what) {
    if (!r.converged) {
        throw ConvergenceError(what + ": quadrature did not converge (error estimate " +
                                   std::to_string(r.error_estimate) + ")",
                               r.value, r.error_estimate);
    }
    return r;
}

/// Integral of f over [lo, hi] by composite Gauss-Legendre with doubling.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureConfig& config,
                           std::span<const double> breakpoints = {}) {
    config.validate();
    const Partition partition = make_partition(lo, hi, config.base_panels, breakpoints);
    std::vector<double> terms;
    auto result = refine(partition, config, [&](const CompositeRule& rule) {
        terms.resize(rule.size());
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double fx = f(rule.nodes[i]);
            if (!std::isfinite(fx)) {
                throw IntegrandError("integrate: non-finite integrand at phi = " +
                                     std::to_string(rule.nodes[i]));
            }
            terms[i] = rule.weights[i] * fx;
        }
        return pairwise_sum(terms);
    });
    return require_converged(std::move(result), "integrate");
}

/// Integral over the phase circle (-pi, pi].
template <class F>
QuadratureResult integrate(F&& f, const QuadratureConfig& config = {}) {
    return integrate(std::forward<F>(f), -std::numbers::pi, std::numbers::pi, config);
}

}  // namespace mzsense::numerics
