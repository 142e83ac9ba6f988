#pragma once

// Prior phase densities on (-pi, pi]: uniform, truncated Gaussian and
// tabulated.  Each prior also reports the interval outside which it is
// negligible and the kinks of its density, so integrals over the prior
// can place panels where they matter.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mzsense/errors.hpp"
#include "mzsense/numerics/quadrature.hpp"

namespace mzsense {

enum class PriorKind { uniform, gaussian, tabulated };

inline std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::uniform: return "uniform";
        case PriorKind::gaussian: return "gaussian";
        case PriorKind::tabulated: return "tabulated";
    }
    return "tabulated";
}

class Prior {
public:
    /// Gaussian support is cut at this many widths; exp(-98) is below double resolution
    /// relative to the peak.
    static constexpr double gaussian_cutoff = 14.0;

    static Prior uniform() {
        Prior p(PriorKind::uniform);
        p.lo_ = -std::numbers::pi;
        p.hi_ = std::numbers::pi;
        return p;
    }

    /// C exp[-(phi - center)^2 / (2 sigma^2)] renormalized on (-pi, pi].
    static Prior gaussian(double center, double sigma) {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw InvalidWidth("gaussian prior: sigma must be > 0");
        }
        if (!(center > -std::numbers::pi && center <= std::numbers::pi)) {
            throw InvalidPrior("gaussian prior: center must lie in (-pi, pi]");
        }
        Prior p(PriorKind::gaussian);
        p.center_ = center;
        p.sigma_ = sigma;
        const double s2 = sigma * std::numbers::sqrt2;
        const double mass = 0.5 * (std::erf((std::numbers::pi - center) / s2) -
                                   std::erf((-std::numbers::pi - center) / s2));
        p.norm_ = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi) * mass);
        p.lo_ = std::max(-std::numbers::pi, center - gaussian_cutoff * sigma);
        p.hi_ = std::min(std::numbers::pi, center + gaussian_cutoff * sigma);
        return p;
    }

    /// Piecewise-linear density through (phi_i, density_i), zero outside
    /// [phi_0, phi_last], rescaled to unit mass.
    static Prior tabulated(std::vector<double> phi, std::vector<double> density,
                           std::string source = {}) {
        if (phi.size() != density.size()) throw InvalidPrior("tabulated prior: column length mismatch");
        if (phi.size() < 2) throw InvalidPrior("tabulated prior: need at least 2 rows");
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (!(phi[i] > -std::numbers::pi && phi[i] <= std::numbers::pi)) {
                throw InvalidPrior("tabulated prior: phi must lie in (-pi, pi]");
            }
            if (i > 0 && !(phi[i] > phi[i - 1])) {
                throw InvalidPrior("tabulated prior: phi must be strictly increasing");
            }
            if (!(density[i] >= 0.0) || !std::isfinite(density[i])) {
                throw InvalidPrior("tabulated prior: density must be finite and >= 0");
            }
        }
        double mass = 0.0;
        for (std::size_t i = 1; i < phi.size(); ++i) {
            mass += 0.5 * (density[i] + density[i - 1]) * (phi[i] - phi[i - 1]);
        }
        if (!(mass > 0.0)) throw InvalidPrior("tabulated prior: density integrates to zero");
        for (double& d : density) d /= mass;

        Prior p(PriorKind::tabulated);
        p.lo_ = phi.front();
        p.hi_ = phi.back();
        p.table_phi_ = std::move(phi);
        p.table_density_ = std::move(density);
        p.source_ = std::move(source);
        return p;
    }

    PriorKind kind() const { return kind_; }

    double density(double phi) const {
        if (phi < -std::numbers::pi || phi > std::numbers::pi) return 0.0;
        switch (kind_) {
            case PriorKind::uniform:
                return 1.0 / (2.0 * std::numbers::pi);
            case PriorKind::gaussian: {
                const double u = (phi - center_) / sigma_;
                return norm_ * std::exp(-0.5 * u * u);
            }
            case PriorKind::tabulated: {
                if (phi < table_phi_.front() || phi > table_phi_.back()) return 0.0;
                const auto it = std::upper_bound(table_phi_.begin(), table_phi_.end(), phi);
                if (it == table_phi_.end()) return table_density_.back();
                const std::size_t i = static_cast<std::size_t>(it - table_phi_.begin());
                const double t = (phi - table_phi_[i - 1]) / (table_phi_[i] - table_phi_[i - 1]);
                return table_density_[i - 1] + t * (table_density_[i] - table_density_[i - 1]);
            }
        }
        return 0.0;
    }

    /// Interval carrying all non-negligible mass.
    std::pair<double, double> support() const { return {lo_, hi_}; }

    /// Interior points where the density is not smooth.
    std::span<const double> breakpoints() const {
        if (kind_ != PriorKind::tabulated) return {};
        return std::span<const double>(table_phi_).subspan(1, table_phi_.size() - 2);
    }

    /// Nominal center and width; only meaningful for Gaussian priors.
    std::optional<double> center() const {
        return kind_ == PriorKind::gaussian ? std::optional<double>(center_) : std::nullopt;
    }
    std::optional<double> sigma() const {
        return kind_ == PriorKind::gaussian ? std::optional<double>(sigma_) : std::nullopt;
    }
    /// C(center, sigma) for Gaussian priors.
    double normalization() const { return norm_; }

    const std::string& source() const { return source_; }
    std::span<const double> table_phi() const { return table_phi_; }
    std::span<const double> table_density() const { return table_density_; }

private:
    explicit Prior(PriorKind kind) : kind_(kind) {}

    PriorKind kind_;
    double center_ = 0.0;
    double sigma_ = 0.0;
    double norm_ = 0.0;
    double lo_ = -std::numbers::pi;
    double hi_ = std::numbers::pi;
    std::vector<double> table_phi_;
    std::vector<double> table_density_;
    std::string source_;
};

inline Prior uniform_prior() { return Prior::uniform(); }

inline Prior gaussian_prior(double center, double sigma) { return Prior::gaussian(center, sigma); }

/// Reads a `phi,density` CSV with a header row.
inline Prior load_tabulated_prior(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidPrior("cannot open prior file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidPrior("prior file is empty: " + path);
    std::vector<double> phi;
    std::vector<double> density;
    int line_no = 1;
    auto parse = [&](std::string_view text, double& out) {
        while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
        while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
            text.remove_suffix(1);
        }
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw InvalidPrior(path + ":" + std::to_string(line_no) + ": malformed number '" +
                               std::string(text) + "'");
        }
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidPrior(path + ":" + std::to_string(line_no) + ": expected 'phi,density'");
        }
        double p = 0.0;
        double d = 0.0;
        parse(std::string_view(line).substr(0, comma), p);
        parse(std::string_view(line).substr(comma + 1), d);
        phi.push_back(p);
        density.push_back(d);
    }
    return Prior::tabulated(std::move(phi), std::move(density), path);
}

/// Integral of g(phi) p(phi) over the prior's support.
template <class G>
numerics::QuadratureResult integrate_against(const Prior& prior, G&& g,
                                             const numerics::QuadratureConfig& config = {}) {
    const auto [lo, hi] = prior.support();
    return numerics::integrate([&](double phi) { return g(phi) * prior.density(phi); }, lo, hi,
                               config, prior.breakpoints());
}

struct Moments {
    double mean;
    double variance;
};

/// Mean and central second moment of the (possibly truncated) density.
inline Moments moments(const Prior& prior, const numerics::QuadratureConfig& config = {}) {
    const double mean = integrate_against(prior, [](double phi) { return phi; }, config).value;
    const double variance =
        integrate_against(prior, [mean](double phi) { return (phi - mean) * (phi - mean); }, config).value;
    return Moments{mean, variance};
}

}  // namespace mzsense
