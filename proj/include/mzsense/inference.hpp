#pragma once

// Bayesian phase posterior for a single photon-count outcome, peak
// detection on the phase circle, Gaussian peak widths and the power-law
// scaling of those widths with photon number.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mzsense/errors.hpp"
#include "mzsense/linear_optics.hpp"
#include "mzsense/numerics/fit.hpp"
#include "mzsense/numerics/quadrature.hpp"
#include "mzsense/priors.hpp"

namespace mzsense {

/// Evidence at or below this is treated as exactly zero: output amplitudes
/// carry ~1e-16 absolute round-off, so probabilities under ~1e-30 are noise.
inline constexpr double zero_evidence = 1e-28;

inline constexpr int default_grid_points = 4096;

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phi + std::numbers::pi, two_pi);
    if (r <= 0.0) r += two_pi;
    return r - std::numbers::pi;
}

/// Uniform grid on (-pi, pi]: phi_i = -pi + 2 pi (i + 1) / n.
inline std::vector<double> phase_grid(int points) {
    if (points < 2) throw InsufficientResolution("phase grid needs at least 2 points");
    std::vector<double> phi(points);
    for (int i = 0; i < points; ++i) {
        phi[i] = i == points - 1 ? std::numbers::pi
                                 : -std::numbers::pi + 2.0 * std::numbers::pi * (i + 1) / points;
    }
    return phi;
}

inline void check_outcome(const TwoModeState& state, Outcome m) {
    if (m.n_c < 0 || m.n_d < 0 || m.photons() != state.photons()) {
        throw OutcomeMismatch("outcome (" + std::to_string(m.n_c) + "," + std::to_string(m.n_d) +
                              ") does not match N = " + std::to_string(state.photons()));
    }
}

/// Marginal probability of every outcome under the prior, indexed by n_c.
inline numerics::VectorQuadratureResult evidences(const TwoModeState& state, const Prior& prior,
                                                  const numerics::QuadratureConfig& quad = {},
                                                  const MzConvention& conv = MzConvention::standard()) {
    const Interferometer mz(state, conv);
    const auto [lo, hi] = prior.support();
    const auto partition = numerics::make_partition(lo, hi, quad.base_panels, prior.breakpoints());
    const int outcomes = state.photons() + 1;
    auto result = numerics::refine_vector(partition, quad, [&](const numerics::CompositeRule& rule) {
        std::vector<std::vector<double>> terms(outcomes, std::vector<double>(rule.size()));
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double wp = rule.weights[i] * prior.density(rule.nodes[i]);
            const auto p = mz.probabilities(rule.nodes[i]);
            for (int m = 0; m < outcomes; ++m) terms[m][i] = wp * p[m];
        }
        std::vector<double> e(outcomes);
        for (int m = 0; m < outcomes; ++m) e[m] = numerics::pairwise_sum(terms[m]);
        return e;
    });
    if (!result.converged) {
        throw ConvergenceError("evidence: quadrature did not converge", result.values.front(),
                               result.error_estimate);
    }
    return result;
}

/// Denominator of Bayes' rule: integral of P(m|phi) p(phi).
inline double evidence(const TwoModeState& state, Outcome m, const Prior& prior,
                       const numerics::QuadratureConfig& quad = {},
                       const MzConvention& conv = MzConvention::standard()) {
    check_outcome(state, m);
    const Interferometer mz(state, conv);
    return integrate_against(prior, [&](double phi) { return mz.probabilities(phi)[m.n_c]; }, quad)
        .value;
}

/// p(phi | m) tabulated on phase_grid(n).
struct PosteriorDensity {
    Outcome outcome;
    Prior prior;
    std::vector<double> phi;
    std::vector<double> density;
    double evidence = 0.0;

    double spacing() const { return 2.0 * std::numbers::pi / static_cast<double>(phi.size()); }

    /// Trapezoid rule on the closed circle.
    double integral() const { return numerics::pairwise_sum(density) * spacing(); }
};

inline PosteriorDensity posterior(const TwoModeState& state, Outcome m, const Prior& prior,
                                  int grid_points = default_grid_points,
                                  const numerics::QuadratureConfig& quad = {},
                                  const MzConvention& conv = MzConvention::standard()) {
    check_outcome(state, m);
    const double e = evidence(state, m, prior, quad, conv);
    if (!(e > zero_evidence)) {
        throw ImpossibleOutcome("outcome (" + std::to_string(m.n_c) + "," + std::to_string(m.n_d) +
                                ") has zero probability under this prior");
    }
    const Interferometer mz(state, conv);
    PosteriorDensity out{m, prior, phase_grid(grid_points), {}, e};
    out.density.resize(out.phi.size());
    for (std::size_t i = 0; i < out.phi.size(); ++i) {
        out.density[i] = mz.probabilities(out.phi[i])[m.n_c] * prior.density(out.phi[i]) / e;
    }
    return out;
}

struct Peak {
    double center;
    double height;
};

/// Local maxima of a density sampled on a uniform periodic grid.
///
/// Neighbouring samples closer than 1e-10 of the maximum are treated as
/// equal, so flat stretches (including round-off noise near zero) form
/// plateaus; a plateau higher than both neighbours is one peak at its
/// midpoint.  Ordered by phi.
inline std::vector<Peak> find_peaks(std::span<const double> phi, std::span<const double> density) {
    const std::size_t n = density.size();
    if (phi.size() != n) throw DomainError("find_peaks: grid and density lengths differ");
    if (n < 512) throw InsufficientResolution("find_peaks: grid needs at least 512 points");
    const double top = *std::max_element(density.begin(), density.end());
    const double tol = 1e-10 * std::abs(top);
    auto at = [&](std::size_t i) { return density[i % n]; };

    // Start at a sample that differs from its predecessor, so no plateau wraps.
    std::optional<std::size_t> start;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(at(i) - at(i + n - 1)) > tol) {
            start = i;
            break;
        }
    }
    if (!start) return {};

    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    std::vector<Peak> peaks;
    std::size_t i = 0;
    while (i < n) {
        const std::size_t first = *start + i;
        std::size_t last = first;
        while (last + 1 < *start + n && std::abs(at(last + 1) - at(last)) <= tol) ++last;
        const double before = at(first + n - 1);
        const double after = at(last + 1);
        double height = at(first);
        for (std::size_t k = first; k <= last; ++k) height = std::max(height, at(k));
        if (height - before > tol && height - after > tol) {
            const double mid = phi[first % n] + 0.5 * static_cast<double>(last - first) * h;
            peaks.push_back(Peak{wrap_phase(mid), height});
        }
        i += last - first + 1;
    }
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.center < b.center; });
    return peaks;
}

inline std::vector<Peak> find_peaks(const PosteriorDensity& d) { return find_peaks(d.phi, d.density); }

struct PeakFit {
    double center;
    double width;
    double amplitude;
    double residual;
};

/// Gaussian fit over the contiguous half-maximum window around a peak.
inline PeakFit gaussian_peak_fit(const PosteriorDensity& d, double peak_center) {
    const long n = static_cast<long>(d.density.size());
    const double h = d.spacing();
    auto wrap = [n](long i) { return static_cast<std::size_t>(((i % n) + n) % n); };
    auto at = [&](long i) { return d.density[wrap(i)]; };

    // Nearest grid node, then climb to the local maximum it belongs to.
    long idx = std::lround((wrap_phase(peak_center) + std::numbers::pi) / h) - 1;
    for (long guard = 0; guard < n; ++guard) {
        if (at(idx + 1) > at(idx)) {
            ++idx;
        } else if (at(idx - 1) > at(idx)) {
            --idx;
        } else {
            break;
        }
    }
    const double height = at(idx);
    const double half = 0.5 * height;
    long left = idx;
    long right = idx;
    while (right - left + 1 < n && at(left - 1) >= half) --left;
    while (right - left + 1 < n && at(right + 1) >= half) ++right;
    const long count = right - left + 1;
    if (count < 5) {
        throw InsufficientResolution("gaussian_peak_fit: half-maximum window has only " +
                                     std::to_string(count) + " grid points");
    }

    const double peak_phi = d.phi[wrap(idx)];
    std::vector<numerics::Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (long i = left; i <= right; ++i) {
        pts.push_back({peak_phi + static_cast<double>(i - idx) * h, at(i)});
    }
    const double init_width = 0.5 * static_cast<double>(count) * h / std::sqrt(2.0 * std::numbers::ln2);
    const auto fit = numerics::nonlinear_gaussian_fit(pts, {height, peak_phi, init_width});
    return PeakFit{wrap_phase(fit.center), std::abs(fit.width), fit.amplitude, fit.rms_residual};
}

struct WidthSample {
    int photons;
    double width;
};

struct ScalingFit {
    double prefactor;  ///< a in width = a / N^b
    double exponent;   ///< b
    std::vector<WidthSample> widths;
};

/// Least squares on log width = log a - b log N.
inline ScalingFit scaling_fit(std::span<const WidthSample> widths) {
    if (widths.size() < 3) throw DomainError("scaling_fit: need at least 3 points");
    std::vector<numerics::Point> pts;
    pts.reserve(widths.size());
    for (const auto& w : widths) {
        if (!(w.width > 0.0)) throw DomainError("scaling_fit: widths must be positive");
        if (w.photons < 1) throw DomainError("scaling_fit: photon numbers must be >= 1");
        pts.push_back({static_cast<double>(w.photons), w.width});
    }
    const auto law = numerics::power_law_fit(pts);
    return ScalingFit{law.prefactor, law.exponent, {widths.begin(), widths.end()}};
}

/// Which outcome's posterior supplies the width for each N.
enum class OutcomePolicy {
    all_in_d,  ///< (0, N): single peak at phi = 0
    all_in_c,  ///< (N, 0): single peak at phi = pi
    balanced,  ///< (floor(N/2), ceil(N/2))
    fixed_nc,  ///< (k, N - k) for a given k; N < k is skipped
};

struct ScalingStudyOptions {
    OutcomePolicy policy = OutcomePolicy::all_in_d;
    int fixed_nc = 0;
    /// Peak index in phi order; negative selects the highest peak.
    int peak_index = -1;
    int grid_points = default_grid_points;
};

inline std::optional<Outcome> study_outcome(int photons, const ScalingStudyOptions& opt) {
    switch (opt.policy) {
        case OutcomePolicy::all_in_d: return Outcome{0, photons};
        case OutcomePolicy::all_in_c: return Outcome{photons, 0};
        case OutcomePolicy::balanced: return Outcome{photons / 2, photons - photons / 2};
        case OutcomePolicy::fixed_nc:
            if (opt.fixed_nc < 0 || opt.fixed_nc > photons) return std::nullopt;
            return Outcome{opt.fixed_nc, photons - opt.fixed_nc};
    }
    return std::nullopt;
}

struct WidthFailure {
    int photons;
    std::string reason;
};

struct WidthStudy {
    std::vector<WidthSample> widths;
    std::vector<WidthFailure> failures;
};

/// Peak widths of uniform-prior Fock posteriors for N in [n_min, n_max].
inline WidthStudy fock_peak_widths(int n_min, int n_max, const ScalingStudyOptions& opt = {}) {
    WidthStudy study;
    const Prior prior = uniform_prior();
    for (int n = n_min; n <= n_max; ++n) {
        const auto m = study_outcome(n, opt);
        if (!m) {
            study.failures.push_back({n, "outcome not available for this N"});
            continue;
        }
        try {
            const auto post = posterior(fock_input(n), *m, prior, opt.grid_points);
            const auto peaks = find_peaks(post);
            if (peaks.empty()) {
                study.failures.push_back({n, "posterior has no peak"});
                continue;
            }
            std::size_t pick = 0;
            if (opt.peak_index < 0) {
                for (std::size_t i = 1; i < peaks.size(); ++i) {
                    if (peaks[i].height > peaks[pick].height) pick = i;
                }
            } else if (static_cast<std::size_t>(opt.peak_index) < peaks.size()) {
                pick = static_cast<std::size_t>(opt.peak_index);
            } else {
                study.failures.push_back({n, "peak index out of range"});
                continue;
            }
            const auto fit = gaussian_peak_fit(post, peaks[pick].center);
            study.widths.push_back({n, fit.width});
        } catch (const Error& e) {
            study.failures.push_back({n, e.what()});
        }
    }
    return study;
}

}  // namespace mzsense
