#pragma once

// Two-mode Fock-space model of a Mach-Zehnder interferometer.
//
// Basis ordering: index k of an N-photon ket means |k, N-k>, i.e. k photons
// in mode 0 (input port a / output port c) and N-k in mode 1 (port b / d).
// A 2x2 mode matrix M maps creation operators as a_i^dag -> sum_j M(j,i) a_j^dag;
// its N-photon representation is built by applying one creation operator at
// a time, which keeps every intermediate column normalized.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mzsense/errors.hpp"

namespace mzsense {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Measurement outcome m = (n_c, n_d).
struct Outcome {
    int n_c = 0;
    int n_d = 0;

    int photons() const { return n_c + n_d; }
    friend bool operator==(const Outcome&, const Outcome&) = default;
};

enum class StateKind { fock, noon, custom };

inline std::string to_string(StateKind k) {
    switch (k) {
        case StateKind::fock: return "fock";
        case StateKind::noon: return "noon";
        case StateKind::custom: return "custom";
    }
    return "custom";
}

/// Pure input state of definite total photon number N >= 1.
class TwoModeState {
public:
    TwoModeState(std::vector<Complex> amplitudes, StateKind kind = StateKind::custom)
        : amplitudes_(std::move(amplitudes)), kind_(kind) {
        if (amplitudes_.size() < 2) {
            throw InvalidPhotonNumber("state needs N >= 1 (at least 2 amplitudes)");
        }
        double norm = 0.0;
        for (const auto& a : amplitudes_) norm += std::norm(a);
        if (std::abs(norm - 1.0) > 1e-12) {
            throw InvalidState("state amplitudes are not normalized (sum |a|^2 = " +
                               std::to_string(norm) + ")");
        }
    }

    int photons() const { return static_cast<int>(amplitudes_.size()) - 1; }
    std::span<const Complex> amplitudes() const { return amplitudes_; }
    StateKind kind() const { return kind_; }

    ComplexVector as_vector() const {
        return Eigen::Map<const ComplexVector>(amplitudes_.data(),
                                               static_cast<Eigen::Index>(amplitudes_.size()));
    }

private:
    std::vector<Complex> amplitudes_;
    StateKind kind_;
};

/// |N, 0>: all photons in port a, vacuum in port b.
inline TwoModeState fock_input(int photons) {
    if (photons < 1) throw InvalidPhotonNumber("fock_input: N must be >= 1");
    std::vector<Complex> amp(photons + 1, Complex{0.0, 0.0});
    amp[photons] = 1.0;
    return TwoModeState(std::move(amp), StateKind::fock);
}

/// (|N, 0> + |0, N>) / sqrt(2).
inline TwoModeState noon_input(int photons) {
    if (photons < 1) throw InvalidPhotonNumber("noon_input: N must be >= 1");
    std::vector<Complex> amp(photons + 1, Complex{0.0, 0.0});
    amp[photons] = std::numbers::sqrt2 / 2.0;
    amp[0] = std::numbers::sqrt2 / 2.0;
    return TwoModeState(std::move(amp), StateKind::noon);
}

/// Splitter matrix, phase arm and output labelling of the interferometer.
///
/// The standard convention is B = [[1, i], [i, 1]] / sqrt(2) for both
/// splitters, e^{i phi} on internal mode 1 and port c on output mode 0.
/// With it, one photon in port a exits c with probability sin^2(phi/2) and
/// (|1,0> + |0,1>)/sqrt(2) exits c with probability (1 - sin phi) / 2.
struct MzConvention {
    Eigen::Matrix2cd beam_splitter;
    int phase_arm = 1;    ///< internal mode carrying e^{i phi}
    int port_c_mode = 0;  ///< output mode labelled c

    static MzConvention standard() {
        MzConvention c;
        const double r = std::numbers::sqrt2 / 2.0;
        c.beam_splitter << Complex{r, 0.0}, Complex{0.0, r}, Complex{0.0, r}, Complex{r, 0.0};
        c.phase_arm = 1;
        c.port_c_mode = 0;
        return c;
    }

    void validate() const {
        const Eigen::Matrix2cd should_be_identity = beam_splitter.adjoint() * beam_splitter;
        if ((should_be_identity - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
            throw DomainError("MzConvention: beam splitter is not unitary");
        }
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                if (std::abs(std::abs(beam_splitter(i, j)) - std::numbers::sqrt2 / 2.0) > 1e-12) {
                    throw DomainError("MzConvention: beam splitter is not 50/50");
                }
            }
        }
        if (phase_arm != 0 && phase_arm != 1) throw DomainError("MzConvention: phase_arm must be 0 or 1");
        if (port_c_mode != 0 && port_c_mode != 1) {
            throw DomainError("MzConvention: port_c_mode must be 0 or 1");
        }
    }
};

/// N-photon representation of a 2x2 mode transformation.
/// Entry (j, k) is <j, N-j| U |k, N-k>.
inline ComplexMatrix fock_representation(const Eigen::Matrix2cd& modes, int photons) {
    if (photons < 0) throw InvalidPhotonNumber("fock_representation: N must be >= 0");
    ComplexMatrix prev = ComplexMatrix::Ones(1, 1);
    for (int n = 1; n <= photons; ++n) {
        ComplexMatrix next = ComplexMatrix::Zero(n + 1, n + 1);
        for (int k = 0; k <= n; ++k) {
            // Column k is reached by adding one photon to column `src` of the
            // (n-1)-photon representation, in the more occupied input mode so
            // the 1/sqrt(occupancy) factor stays small.
            const bool via_0 = 2 * k >= n;
            const int in_mode = via_0 ? 0 : 1;
            const int src = via_0 ? k - 1 : k;
            const double occupancy = via_0 ? k : n - k;
            const Complex to_0 = modes(0, in_mode);
            const Complex to_1 = modes(1, in_mode);
            const double inv = 1.0 / std::sqrt(occupancy);
            for (int j = 0; j <= n; ++j) {
                Complex acc{0.0, 0.0};
                if (j >= 1) acc += to_0 * std::sqrt(static_cast<double>(j)) * prev(j - 1, src);
                if (j <= n - 1) acc += to_1 * std::sqrt(static_cast<double>(n - j)) * prev(j, src);
                next(j, k) = inv * acc;
            }
        }
        prev = std::move(next);
    }
    return prev;
}

/// Photon number of the phase arm for each basis index.
inline Eigen::VectorXd phase_arm_occupation(int photons, const MzConvention& conv) {
    Eigen::VectorXd k(photons + 1);
    for (int i = 0; i <= photons; ++i) k[i] = conv.phase_arm == 0 ? i : photons - i;
    return k;
}

/// U(phi) = B P(phi) B on the N-photon space, P(phi) = diag(e^{i K phi}).
inline ComplexMatrix mz_unitary(int photons, double phase,
                                const MzConvention& conv = MzConvention::standard()) {
    if (photons < 1) throw InvalidPhotonNumber("mz_unitary: N must be >= 1");
    conv.validate();
    const ComplexMatrix b = fock_representation(conv.beam_splitter, photons);
    const Eigen::VectorXd k = phase_arm_occupation(photons, conv);
    ComplexVector p(photons + 1);
    for (int i = 0; i <= photons; ++i) p[i] = std::polar(1.0, k[i] * phase);
    return b * p.asDiagonal() * b;
}

/// P(m | phi) over the N+1 outcomes, index k meaning (n_c = k, n_d = N - k).
struct OutcomeDistribution {
    int photons = 0;
    double phase = 0.0;
    std::vector<double> probs;

    double probability(Outcome m) const {
        if (m.photons() != photons || m.n_c < 0 || m.n_d < 0) {
            throw OutcomeMismatch("outcome does not match the photon number");
        }
        return probs[m.n_c];
    }
};

/// P, dP/dphi and d^2P/dphi^2 per outcome, indexed by n_c.
struct OutcomeDerivatives {
    std::vector<double> p;
    std::vector<double> dp;
    std::vector<double> d2p;
};

/// A fixed (state, convention) pair evaluated at many phases.
///
/// B|s> is phase-independent and cached, so each phase costs one
/// diagonal scaling and one (N+1)^2 product.
class Interferometer {
public:
    explicit Interferometer(const TwoModeState& state,
                            const MzConvention& conv = MzConvention::standard())
        : photons_(state.photons()), conv_(conv) {
        conv_.validate();
        splitter_ = fock_representation(conv_.beam_splitter, photons_);
        after_first_ = splitter_ * state.as_vector();
        occupation_ = phase_arm_occupation(photons_, conv_);
    }

    int photons() const { return photons_; }
    const MzConvention& convention() const { return conv_; }

    /// Output amplitudes ordered by n_c.
    ComplexVector amplitudes(double phase) const { return output(phase, 0); }

    std::vector<double> probabilities(double phase) const {
        const ComplexVector psi = amplitudes(phase);
        std::vector<double> out(photons_ + 1);
        for (int i = 0; i <= photons_; ++i) out[i] = std::norm(psi[i]);
        return out;
    }

    OutcomeDistribution distribution(double phase) const {
        return OutcomeDistribution{photons_, phase, probabilities(phase)};
    }

    /// Analytic derivatives from dU/dphi = B (iK) P(phi) B.
    OutcomeDerivatives derivatives(double phase) const {
        const ComplexVector psi = output(phase, 0);
        const ComplexVector d1 = output(phase, 1);
        const ComplexVector d2 = output(phase, 2);
        OutcomeDerivatives out;
        out.p.resize(photons_ + 1);
        out.dp.resize(photons_ + 1);
        out.d2p.resize(photons_ + 1);
        for (int i = 0; i <= photons_; ++i) {
            out.p[i] = std::norm(psi[i]);
            out.dp[i] = 2.0 * std::real(std::conj(psi[i]) * d1[i]);
            out.d2p[i] = 2.0 * std::norm(d1[i]) + 2.0 * std::real(std::conj(psi[i]) * d2[i]);
        }
        return out;
    }

private:
    // order-th phase derivative of the output amplitudes.
    ComplexVector output(double phase, int order) const {
        ComplexVector w(photons_ + 1);
        for (int i = 0; i <= photons_; ++i) {
            Complex factor = std::polar(1.0, occupation_[i] * phase);
            for (int d = 0; d < order; ++d) factor *= Complex{0.0, occupation_[i]};
            w[i] = factor * after_first_[i];
        }
        ComplexVector psi = splitter_ * w;
        if (conv_.port_c_mode == 1) psi.reverseInPlace();
        return psi;
    }

    int photons_;
    MzConvention conv_;
    ComplexMatrix splitter_;
    ComplexVector after_first_;
    Eigen::VectorXd occupation_;
};

inline OutcomeDistribution outcome_distribution(const TwoModeState& state, double phase,
                                                const MzConvention& conv = MzConvention::standard()) {
    return Interferometer(state, conv).distribution(phase);
}

inline OutcomeDerivatives conditional_derivatives(const TwoModeState& state, double phase,
                                                  const MzConvention& conv = MzConvention::standard()) {
    return Interferometer(state, conv).derivatives(phase);
}

/// Binomial closed form for Fock input:
/// P(n_c, n_d | phi) = C(N, n_c) sin^{2 n_c}(phi/2) cos^{2 n_d}(phi/2).
inline OutcomeDistribution fock_binomial_oracle(int photons, double phase) {
    if (photons < 1) throw InvalidPhotonNumber("fock_binomial_oracle: N must be >= 1");
    const double s = std::pow(std::sin(0.5 * phase), 2);
    const double c = std::pow(std::cos(0.5 * phase), 2);
    OutcomeDistribution out{photons, phase, std::vector<double>(photons + 1)};
    for (int k = 0; k <= photons; ++k) {
        double binom = 0.0;
        if (photons <= 20) {
            double b = 1.0;
            for (int i = 1; i <= k; ++i) b = b * (photons - k + i) / i;
            binom = std::round(b);
        } else {
            binom = std::exp(std::lgamma(photons + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(photons - k + 1.0));
        }
        out.probs[k] = binom * std::pow(s, k) * std::pow(c, photons - k);
    }
    return out;
}

}  // namespace mzsense
