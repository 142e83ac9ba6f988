#pragma once

// Mutual information between the phase and the photon-count outcome
// ("fidelity" of the interferometer as a phase sensor), its narrow-prior
// expansion and the classical Fisher information it reduces to.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mzsense/errors.hpp"
#include "mzsense/inference.hpp"
#include "mzsense/linear_optics.hpp"
#include "mzsense/numerics/quadrature.hpp"
#include "mzsense/priors.hpp"

namespace mzsense {

struct FidelityResult {
    double bits = 0.0;      ///< clamped mutual information
    double raw_bits = 0.0;  ///< before clamping round-off negatives
    std::vector<double> per_outcome;  ///< indexed by n_c, sums to `bits`
    double quad_error = 0.0;          ///< |H(finest) - H(previous level)|
    int levels = 0;
    bool converged = false;
    std::vector<double> error_history;  ///< |H change| after each refinement
    numerics::QuadratureConfig config;
};

/// Contributions this far below zero are quadrature round-off.
inline constexpr double clamp_tolerance = 1e-10;

/// Evaluates H(Phi:M) without throwing on non-convergence; check `converged`.
inline FidelityResult evaluate_mutual_information(const TwoModeState& state, const Prior& prior,
                                                  const numerics::QuadratureConfig& quad = {},
                                                  const MzConvention& conv = MzConvention::standard()) {
    const Interferometer mz(state, conv);
    const int outcomes = state.photons() + 1;
    const auto [lo, hi] = prior.support();
    const auto partition = numerics::make_partition(lo, hi, quad.base_panels, prior.breakpoints());

    auto level = [&](const numerics::CompositeRule& rule) {
        const std::size_t n = rule.size();
        std::vector<double> wp(n);
        std::vector<std::vector<double>> probs(n);
        for (std::size_t i = 0; i < n; ++i) {
            wp[i] = rule.weights[i] * prior.density(rule.nodes[i]);
            probs[i] = mz.probabilities(rule.nodes[i]);
        }
        std::vector<double> contrib(outcomes, 0.0);
        std::vector<double> terms(n);
        for (int m = 0; m < outcomes; ++m) {
            for (std::size_t i = 0; i < n; ++i) terms[i] = wp[i] * probs[i][m];
            const double e = numerics::pairwise_sum(terms);
            if (!(e > zero_evidence)) continue;
            // Inner evidence first, then the outer integral; 0 log 0 = 0.
            for (std::size_t i = 0; i < n; ++i) {
                const double joint = wp[i] * probs[i][m];
                terms[i] = joint > 0.0 ? joint * std::log2(probs[i][m] / e) : 0.0;
            }
            contrib[m] = numerics::pairwise_sum(terms);
        }
        return contrib;
    };
    auto total_change = [](const std::vector<double>& a, const std::vector<double>& b) {
        return std::abs(numerics::pairwise_sum(b) - numerics::pairwise_sum(a));
    };
    auto q = numerics::refine_vector(partition, quad, level, total_change);

    FidelityResult out;
    out.config = quad;
    out.levels = q.levels;
    out.converged = q.converged;
    out.quad_error = q.error_estimate;
    out.error_history = q.error_history;
    out.raw_bits = numerics::pairwise_sum(q.values);
    out.per_outcome = q.values;
    // Each contribution is evidence * KL(posterior || prior) >= 0.
    for (double& c : out.per_outcome) {
        if (c < 0.0 && c >= -clamp_tolerance) c = 0.0;
    }
    out.bits = numerics::pairwise_sum(out.per_outcome);
    return out;
}

/// H(Phi:M) in bits; throws ConvergenceError carrying the best estimate.
inline FidelityResult mutual_information(const TwoModeState& state, const Prior& prior,
                                         const numerics::QuadratureConfig& quad = {},
                                         const MzConvention& conv = MzConvention::standard()) {
    auto r = evaluate_mutual_information(state, prior, quad, conv);
    if (!r.converged) {
        throw ConvergenceError("mutual_information: quadrature did not converge", r.bits, r.quad_error);
    }
    return r;
}

/// sigma^2 N / (2 ln 2).
inline double asymptotic_fidelity(int photons, double sigma2) {
    if (photons < 1) throw InvalidPhotonNumber("asymptotic_fidelity: N must be >= 1");
    if (!(sigma2 > 0.0)) throw InvalidWidth("asymptotic_fidelity: sigma^2 must be > 0");
    return sigma2 * photons / (2.0 * std::numbers::ln2);
}

/// Below this P(m|phi) is treated as zero in the P'^2/P terms.
inline constexpr double degenerate_probability = 1e-12;

/// True when P(m|phi) vanishes for every phi.  P is a trigonometric
/// polynomial of degree N, so vanishing on 2N+1 distinct phases suffices.
inline bool identically_zero(const Interferometer& mz, int n_c) {
    const int samples = 2 * mz.photons() + 1;
    for (int j = 0; j < samples; ++j) {
        const double phi = -std::numbers::pi + 2.0 * std::numbers::pi * (j + 0.5) / samples + 0.1234;
        if (mz.probabilities(phi)[n_c] >= degenerate_probability) return false;
    }
    return true;
}

enum class Degeneracy { none, limit, identically_zero };

inline std::string to_string(Degeneracy d) {
    switch (d) {
        case Degeneracy::none: return "none";
        case Degeneracy::limit: return "limit";
        case Degeneracy::identically_zero: return "identically-zero";
    }
    return "none";
}

/// Amplitudes carry ~1e-15 absolute error, so P above this is resolved
/// to better than one percent.
inline constexpr double resolved_probability = 1e-24;

/// P'^2/P for one outcome.  Outcomes below degenerate_probability take the
/// limit phi -> phi0: while P(phi0) is still resolved the limit is the
/// value itself; at a zero P vanishes to even order 2r, so the limit is
/// 2 P'' for r = 1 and 0 for r > 1.
struct FisherTerm {
    double value;
    Degeneracy degeneracy;
};

inline FisherTerm fisher_term(const Interferometer& mz, const OutcomeDerivatives& d, int n_c) {
    const double direct = d.p[n_c] > 0.0 ? d.dp[n_c] * d.dp[n_c] / d.p[n_c] : 0.0;
    if (d.p[n_c] >= degenerate_probability) return {direct, Degeneracy::none};
    if (identically_zero(mz, n_c)) return {0.0, Degeneracy::identically_zero};
    if (d.p[n_c] >= resolved_probability) return {direct, Degeneracy::limit};
    return {d.d2p[n_c] > degenerate_probability ? 2.0 * d.d2p[n_c] : 0.0, Degeneracy::limit};
}

/// Classical Fisher information sum_m P'^2 / P at the given phase.
inline double fisher_information(const TwoModeState& state, double phase,
                                 const MzConvention& conv = MzConvention::standard()) {
    const Interferometer mz(state, conv);
    const auto d = mz.derivatives(phase);
    double total = 0.0;
    for (int m = 0; m <= state.photons(); ++m) total += fisher_term(mz, d, m).value;
    return total;
}

struct SkippedOutcome {
    Outcome outcome;
    Degeneracy resolution;  ///< limit or identically_zero
};

struct ApproxFidelityResult {
    double bits = 0.0;
    std::vector<SkippedOutcome> skipped_outcomes;
    double phi0 = 0.0;
    double sigma2 = 0.0;
    double fisher = 0.0;          ///< sum_m P'^2/P at phi0
    double curvature_sum = 0.0;   ///< sum_m P'' at phi0
};

/// Narrow-prior expansion
///   H ~ sigma^2 / (2 ln 2) sum_m [P''(m|phi0) (1 - ln 2) + P'(m|phi0)^2 / P(m|phi0)]
/// with phi0 and sigma^2 the prior's actual mean and variance.
inline ApproxFidelityResult narrow_prior_approx(const TwoModeState& state, const Prior& prior,
                                                const MzConvention& conv = MzConvention::standard(),
                                                const numerics::QuadratureConfig& quad = {}) {
    const auto mom = moments(prior, quad);
    const Interferometer mz(state, conv);
    const auto d = mz.derivatives(mom.mean);

    ApproxFidelityResult out;
    out.phi0 = mom.mean;
    out.sigma2 = mom.variance;
    double sum = 0.0;
    int used = 0;
    for (int m = 0; m <= state.photons(); ++m) {
        const auto term = fisher_term(mz, d, m);
        const Outcome outcome{m, state.photons() - m};
        if (term.degeneracy != Degeneracy::none) out.skipped_outcomes.push_back({outcome, term.degeneracy});
        if (term.degeneracy == Degeneracy::identically_zero) continue;
        ++used;
        out.fisher += term.value;
        out.curvature_sum += d.d2p[m];
        sum += d.d2p[m] * (1.0 - std::numbers::ln2) + term.value;
    }
    if (used == 0) throw UndefinedApproximation("narrow_prior_approx: every outcome is degenerate");
    out.bits = mom.variance / (2.0 * std::numbers::ln2) * sum;
    return out;
}

}  // namespace mzsense
