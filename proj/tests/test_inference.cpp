#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mzsense/inference.hpp"
#include "oracles.hpp"

namespace {

using mzsense::fock_input;
using mzsense::gaussian_prior;
using mzsense::noon_input;
using mzsense::Outcome;
using mzsense::uniform_prior;
constexpr double pi = std::numbers::pi;

std::vector<mzsense::Prior> test_priors() {
    return {uniform_prior(), gaussian_prior(0.0, 0.75), gaussian_prior(0.0, 0.375), gaussian_prior(1.0, 0.2)};
}

TEST(Evidence, ClosedFormValues) {
    EXPECT_NEAR(mzsense::evidence(fock_input(1), {1, 0}, uniform_prior()), 0.5, 1e-13);
    EXPECT_NEAR(mzsense::evidence(fock_input(2), {1, 1}, uniform_prior()), 0.25, 1e-13);
    EXPECT_NEAR(mzsense::evidence(fock_input(2), {2, 0}, uniform_prior()), 0.375, 1e-13);
    EXPECT_NEAR(mzsense::evidence(noon_input(2), {1, 1}, uniform_prior()), 0.0, 1e-15);
}

TEST(Evidence, SumsToOne) {
    for (const auto& prior : test_priors()) {
        for (int n = 1; n <= 10; ++n) {
            for (const auto& state : {fock_input(n), noon_input(n)}) {
                double total = 0.0;
                for (double e : mzsense::evidences(state, prior).values) total += e;
                EXPECT_NEAR(total, 1.0, 1e-10) << "N=" << n;
            }
        }
    }
}

TEST(Evidence, RejectsMismatchedOutcome) {
    EXPECT_THROW(mzsense::evidence(fock_input(2), {1, 0}, uniform_prior()), mzsense::OutcomeMismatch);
    EXPECT_THROW(mzsense::evidence(fock_input(2), {-1, 3}, uniform_prior()), mzsense::OutcomeMismatch);
}

TEST(Posterior, FockTwoPhotonClosedForms) {
    const auto state = fock_input(2);
    const auto prior = uniform_prior();
    const auto p20 = mzsense::posterior(state, {2, 0}, prior);
    const auto p11 = mzsense::posterior(state, {1, 1}, prior);
    const auto p02 = mzsense::posterior(state, {0, 2}, prior);
    for (std::size_t i = 0; i < p20.phi.size(); ++i) {
        const double phi = p20.phi[i];
        EXPECT_NEAR(p20.density[i], 4.0 / (3.0 * pi) * std::pow(std::sin(phi / 2), 4), 1e-10);
        EXPECT_NEAR(p11.density[i], std::pow(std::sin(phi), 2) / pi, 1e-10);
        EXPECT_NEAR(p02.density[i], 4.0 / (3.0 * pi) * std::pow(std::cos(phi / 2), 4), 1e-10);
    }
}

TEST(Posterior, ZeroEvidenceIsImpossible) {
    EXPECT_THROW(mzsense::posterior(noon_input(2), {1, 1}, uniform_prior()), mzsense::ImpossibleOutcome);
}

TEST(Posterior, ConstantLikelihoodGivesUniformPosterior) {
    const auto post = mzsense::posterior(noon_input(2), {2, 0}, uniform_prior());
    for (double d : post.density) EXPECT_NEAR(d, 1.0 / (2.0 * pi), 1e-13);
    EXPECT_TRUE(mzsense::find_peaks(post).empty());
}

TEST(Posterior, NoonThreePhotonMatchesDenseOracle) {
    const auto state = noon_input(3);
    const auto amps = oracle::noon_amplitudes(3);
    const int dense = 20000;
    for (int nc = 0; nc <= 3; ++nc) {
        double e = 0.0;
        for (int t = 0; t < dense; ++t) {
            e += oracle::probabilities(amps, -pi + 2 * pi * (t + 0.5) / dense)[nc] / dense;
        }
        const auto post = mzsense::posterior(state, {nc, 3 - nc}, uniform_prior(), 1024);
        EXPECT_NEAR(post.evidence, e, 1e-10);
        double asymmetry = 0.0;
        for (std::size_t i = 0; i < post.phi.size(); i += 37) {
            const double want = oracle::probabilities(amps, post.phi[i])[nc] / (2 * pi * e);
            EXPECT_NEAR(post.density[i], want, 1e-9);
        }
        // Density at phi against density at -phi.
        const auto& phi = post.phi;
        const std::size_t n = phi.size();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            asymmetry = std::max(asymmetry, std::abs(post.density[i] - post.density[n - 2 - i]));
        }
        EXPECT_GT(asymmetry, 1e-3) << "outcome n_c=" << nc;
    }
}

TEST(Posterior, NormalizedOnTheGrid) {
    for (const auto& prior : {uniform_prior(), gaussian_prior(0.0, 0.75), gaussian_prior(0.5, 0.375)}) {
        for (int n = 1; n <= 10; ++n) {
            for (const auto& state : {fock_input(n), noon_input(n)}) {
                for (int nc = 0; nc <= n; ++nc) {
                    try {
                        const auto post = mzsense::posterior(state, {nc, n - nc}, prior);
                        EXPECT_NEAR(post.integral(), 1.0, 1e-6);
                        for (double d : post.density) EXPECT_GE(d, 0.0);
                    } catch (const mzsense::ImpossibleOutcome&) {
                        EXPECT_EQ(state.kind(), mzsense::StateKind::noon);
                    }
                }
            }
        }
    }
}

TEST(Posterior, BayesConsistency) {
    const auto state = noon_input(5);
    const mzsense::Interferometer mz(state);
    for (const auto& prior : test_priors()) {
        const auto post = mzsense::posterior(state, {2, 3}, prior, 1024);
        for (std::size_t i = 0; i < post.phi.size(); ++i) {
            const double want = mz.probabilities(post.phi[i])[2] * prior.density(post.phi[i]);
            EXPECT_NEAR(post.density[i] * post.evidence, want, 1e-12);
        }
    }
}

TEST(Posterior, FockMirrorSymmetry) {
    for (int n = 1; n <= 8; ++n) {
        for (int nc = 0; nc <= n; ++nc) {
            const auto post = mzsense::posterior(fock_input(n), {nc, n - nc}, uniform_prior(), 1024);
            const std::size_t g = post.phi.size();
            // phi_i and phi_{g-2-i} are mirror images; the last node is pi.
            for (std::size_t i = 0; i + 1 < g; ++i) {
                EXPECT_NEAR(post.density[i], post.density[g - 2 - i], 1e-12);
            }
        }
    }
}

TEST(PhaseGrid, EndsAtPiAndExcludesMinusPi) {
    const auto g = mzsense::phase_grid(8);
    EXPECT_EQ(g.back(), pi);
    EXPECT_GT(g.front(), -pi);
    EXPECT_NEAR(g[1] - g[0], pi / 4, 1e-15);
    EXPECT_THROW(mzsense::phase_grid(1), mzsense::InsufficientResolution);
}

TEST(WrapPhase, MapsIntoHalfOpenInterval) {
    EXPECT_DOUBLE_EQ(mzsense::wrap_phase(pi), pi);
    EXPECT_DOUBLE_EQ(mzsense::wrap_phase(-pi), pi);
    EXPECT_NEAR(mzsense::wrap_phase(3 * pi / 2), -pi / 2, 1e-15);
    EXPECT_NEAR(mzsense::wrap_phase(0.25), 0.25, 1e-16);
}

TEST(FindPeaks, FockThreePhotonsHasTwoMirroredPeaks) {
    const auto peaks = mzsense::find_peaks(mzsense::posterior(fock_input(3), {2, 1}, uniform_prior()));
    ASSERT_EQ(peaks.size(), 2u);
    EXPECT_NEAR(peaks[0].center, -peaks[1].center, 2e-3);
    EXPECT_NEAR(peaks[0].height, peaks[1].height, 1e-9);
}

// Expected to fail: the N=3 interior N00N posteriors have three maxima.
TEST(FindPeaks, NoonThreePhotonGenericOutcomeHasFourPeaks) {
    const auto peaks = mzsense::find_peaks(mzsense::posterior(noon_input(3), {2, 1}, uniform_prior()));
    EXPECT_EQ(peaks.size(), 4u);
}

// Odd-N N00N interior posteriors at N=3 have one dominant and two minor
// maxima; four maxima first appear at N=4.
TEST(FindPeaks, NoonPeakCounts) {
    auto count = [](int n, int nc) {
        return mzsense::find_peaks(mzsense::posterior(noon_input(n), {nc, n - nc}, uniform_prior())).size();
    };
    EXPECT_EQ(count(3, 1), 3u);
    EXPECT_EQ(count(3, 2), 3u);
    EXPECT_EQ(count(4, 1), 4u);
    EXPECT_EQ(count(4, 3), 4u);
}

TEST(FindPeaks, PeakCountBounds) {
    for (int n = 1; n <= 10; ++n) {
        for (int nc = 0; nc <= n; ++nc) {
            const Outcome m{nc, n - nc};
            EXPECT_LE(mzsense::find_peaks(mzsense::posterior(fock_input(n), m, uniform_prior())).size(), 2u);
            try {
                EXPECT_LE(mzsense::find_peaks(mzsense::posterior(noon_input(n), m, uniform_prior())).size(), 4u);
            } catch (const mzsense::ImpossibleOutcome&) {
            }
        }
    }
}

TEST(FindPeaks, PeakAtPiIsFoundOnce) {
    const auto peaks = mzsense::find_peaks(mzsense::posterior(fock_input(4), {4, 0}, uniform_prior()));
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_NEAR(std::abs(peaks[0].center), pi, 1e-12);
}

TEST(FindPeaks, PlateauReportsMidpoint) {
    const auto phi = mzsense::phase_grid(1024);
    std::vector<double> d(phi.size(), 0.0);
    for (std::size_t i = 500; i <= 510; ++i) d[i] = 1.0;
    const auto peaks = mzsense::find_peaks(phi, d);
    ASSERT_EQ(peaks.size(), 1u);
    EXPECT_NEAR(peaks[0].center, phi[505], 1e-12);
}

TEST(FindPeaks, RequiresResolution) {
    const auto phi = mzsense::phase_grid(256);
    const std::vector<double> d(phi.size(), 1.0);
    EXPECT_THROW(mzsense::find_peaks(phi, d), mzsense::InsufficientResolution);
}

TEST(GaussianPeakFit, RecoversNarrowGaussianPrior) {
    // Uniform likelihood (N00N N=2) times a Gaussian prior is the prior itself.
    const auto post = mzsense::posterior(noon_input(2), {0, 2}, gaussian_prior(0.3, 0.2));
    const auto peaks = mzsense::find_peaks(post);
    ASSERT_EQ(peaks.size(), 1u);
    const auto fit = mzsense::gaussian_peak_fit(post, peaks[0].center);
    EXPECT_NEAR(fit.width, 0.2, 1e-3);
    EXPECT_NEAR(fit.center, 0.3, 1e-6);
    EXPECT_LT(fit.residual, 1e-8);
}

TEST(GaussianPeakFit, FockAllInDWidthApproachesCurvature) {
    for (int n : {10, 20, 40}) {
        const auto post = mzsense::posterior(fock_input(n), {0, n}, uniform_prior());
        const auto fit = mzsense::gaussian_peak_fit(post, 0.0);
        EXPECT_NEAR(fit.width / std::sqrt(2.0 / n), 1.0, 0.05) << "N=" << n;
        EXPECT_NEAR(fit.center, 0.0, 1e-9);
        EXPECT_GT(fit.width, 0.0);
    }
}

TEST(GaussianPeakFit, WrapsAroundPi) {
    const auto post = mzsense::posterior(fock_input(12), {12, 0}, uniform_prior());
    const auto fit = mzsense::gaussian_peak_fit(post, pi);
    EXPECT_NEAR(std::abs(fit.center), pi, 1e-9);
    EXPECT_NEAR(fit.width / std::sqrt(2.0 / 12), 1.0, 0.08);
}

TEST(GaussianPeakFit, TooFewPointsInWindow) {
    const auto post = mzsense::posterior(fock_input(40), {0, 40}, uniform_prior(), 24);
    EXPECT_THROW(mzsense::gaussian_peak_fit(post, 0.0), mzsense::InsufficientResolution);
}

TEST(ScalingFit, ExactSyntheticLaw) {
    std::vector<mzsense::WidthSample> w;
    for (int n = 1; n <= 40; ++n) w.push_back({n, 2.0 / std::sqrt(n)});
    const auto fit = mzsense::scaling_fit(w);
    EXPECT_NEAR(fit.prefactor, 2.0, 1e-10);
    EXPECT_NEAR(fit.exponent, 0.5, 1e-10);
    EXPECT_EQ(fit.widths.size(), 40u);
}

TEST(ScalingFit, NoisySyntheticLaw) {
    std::mt19937_64 rng(20241016);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<mzsense::WidthSample> w;
    for (int n = 1; n <= 40; ++n) w.push_back({n, 1.3 / std::sqrt(n) * (1.0 + noise(rng))});
    EXPECT_NEAR(mzsense::scaling_fit(w).exponent, 0.5, 0.02);
}

TEST(ScalingFit, RejectsBadData) {
    std::vector<mzsense::WidthSample> two{{1, 1.0}, {2, 0.7}};
    EXPECT_THROW(mzsense::scaling_fit(two), mzsense::DomainError);
    std::vector<mzsense::WidthSample> bad{{1, 1.0}, {2, 0.0}, {3, 0.5}};
    EXPECT_THROW(mzsense::scaling_fit(bad), mzsense::DomainError);
}

TEST(ScalingStudy, OutcomePolicies) {
    mzsense::ScalingStudyOptions opt;
    EXPECT_EQ(*mzsense::study_outcome(5, opt), (Outcome{0, 5}));
    opt.policy = mzsense::OutcomePolicy::all_in_c;
    EXPECT_EQ(*mzsense::study_outcome(5, opt), (Outcome{5, 0}));
    opt.policy = mzsense::OutcomePolicy::balanced;
    EXPECT_EQ(*mzsense::study_outcome(5, opt), (Outcome{2, 3}));
    opt.policy = mzsense::OutcomePolicy::fixed_nc;
    opt.fixed_nc = 3;
    EXPECT_FALSE(mzsense::study_outcome(2, opt));
    EXPECT_EQ(*mzsense::study_outcome(4, opt), (Outcome{3, 1}));
}

TEST(ScalingStudy, DefaultExponentInBand) {
    const auto study = mzsense::fock_peak_widths(1, 40);
    EXPECT_TRUE(study.failures.empty());
    ASSERT_EQ(study.widths.size(), 40u);
    const auto fit = mzsense::scaling_fit(study.widths);
    EXPECT_GE(fit.exponent, 0.45);
    EXPECT_LE(fit.exponent, 0.55);
    EXPECT_GT(fit.prefactor, 0.0);
}

TEST(ScalingStudy, UnavailableOutcomesAreRecorded) {
    mzsense::ScalingStudyOptions opt;
    opt.policy = mzsense::OutcomePolicy::fixed_nc;
    opt.fixed_nc = 3;
    const auto study = mzsense::fock_peak_widths(1, 5, opt);
    EXPECT_EQ(study.failures.size(), 2u);
    EXPECT_EQ(study.widths.size(), 3u);
}

}  // namespace
