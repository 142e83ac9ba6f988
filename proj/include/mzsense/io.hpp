#pragma once

// Text formats shared by the CLI and tests: the prior-spec mini grammar,
// photon ranges, CSV tables (17 significant digits) and JSON reports with
// fixed key order.

#include <charconv>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mzsense/errors.hpp"
#include "mzsense/fidelity.hpp"
#include "mzsense/inference.hpp"
#include "mzsense/linear_optics.hpp"
#include "mzsense/priors.hpp"
#include "mzsense/sweep.hpp"

namespace mzsense::io {

using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(std::string_view text, const char* what) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw DomainError(std::string(what) + ": malformed number '" + std::string(text) + "'");
    }
    return out;
}

inline int parse_int(std::string_view text, const char* what) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw DomainError(std::string(what) + ": malformed integer '" + std::string(text) + "'");
    }
    return out;
}

/// `uniform | gaussian:<center>,<sigma> | file:<path>`
inline Prior parse_prior_spec(std::string_view spec) {
    if (spec == "uniform") return uniform_prior();
    if (spec.starts_with("gaussian:")) {
        const auto args = spec.substr(9);
        const auto comma = args.find(',');
        if (comma == std::string_view::npos) {
            throw InvalidPrior("prior spec: expected gaussian:<center>,<sigma>");
        }
        return gaussian_prior(parse_double(args.substr(0, comma), "gaussian center"),
                              parse_double(args.substr(comma + 1), "gaussian sigma"));
    }
    if (spec.starts_with("file:")) return load_tabulated_prior(std::string(spec.substr(5)));
    throw InvalidPrior("prior spec must be uniform, gaussian:<center>,<sigma> or file:<path>");
}

/// `a..b` or a single `a`.
inline std::pair<int, int> parse_photon_range(std::string_view text) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) {
        const int n = parse_int(text, "photons");
        return {n, n};
    }
    const int lo = parse_int(text.substr(0, dots), "photon range start");
    const int hi = parse_int(text.substr(dots + 2), "photon range end");
    if (hi < lo) throw DomainError("photon range: end is before start");
    return {lo, hi};
}

/// `n_c,n_d`
inline Outcome parse_outcome(std::string_view text) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) throw DomainError("outcome: expected <n_c>,<n_d>");
    return Outcome{parse_int(text.substr(0, comma), "n_c"), parse_int(text.substr(comma + 1), "n_d")};
}

inline Json state_json(const TwoModeState& s) {
    return Json{{"kind", to_string(s.kind())}, {"photons", s.photons()}};
}

inline Json prior_json(const Prior& p) {
    Json j{{"kind", to_string(p.kind())}, {"center", nullptr}, {"sigma", nullptr}};
    if (p.center()) j["center"] = *p.center();
    if (p.sigma()) j["sigma"] = *p.sigma();
    if (p.kind() == PriorKind::tabulated) j["source"] = p.source();
    return j;
}

inline Json quadrature_json(const numerics::QuadratureConfig& q) {
    return Json{{"base_panels", q.base_panels},
                {"nodes_per_panel", q.nodes_per_panel},
                {"max_refinements", q.max_refinements},
                {"abs_tol", q.abs_tol}};
}

inline Json outcome_json(Outcome m) { return Json{{"n_c", m.n_c}, {"n_d", m.n_d}}; }

inline Json fidelity_json(const TwoModeState& s, const Prior& p, const FidelityResult& r) {
    Json per = Json::array();
    for (std::size_t m = 0; m < r.per_outcome.size(); ++m) {
        per.push_back(Json{{"n_c", static_cast<int>(m)},
                           {"n_d", s.photons() - static_cast<int>(m)},
                           {"bits", r.per_outcome[m]}});
    }
    return Json{{"state", state_json(s)},   {"prior", prior_json(p)},
                {"bits", r.bits},           {"quad_error", r.quad_error},
                {"per_outcome", per},       {"raw_bits", r.raw_bits},
                {"converged", r.converged}, {"levels", r.levels},
                {"quadrature", quadrature_json(r.config)}};
}

inline Json approx_json(const TwoModeState& s, const Prior& p, const ApproxFidelityResult& r) {
    Json skipped = Json::array();
    for (const auto& k : r.skipped_outcomes) {
        skipped.push_back(Json{{"n_c", k.outcome.n_c},
                               {"n_d", k.outcome.n_d},
                               {"resolution", to_string(k.resolution)}});
    }
    return Json{{"state", state_json(s)},
                {"prior", prior_json(p)},
                {"bits", r.bits},
                {"phi0", r.phi0},
                {"sigma2", r.sigma2},
                {"fisher_information", r.fisher},
                {"curvature_sum", r.curvature_sum},
                {"asymptotic_bits", asymptotic_fidelity(s.photons(), r.sigma2)},
                {"skipped_outcomes", skipped}};
}

inline Json probs_json(const TwoModeState& s, const OutcomeDistribution& d) {
    Json rows = Json::array();
    for (int k = 0; k <= d.photons; ++k) {
        rows.push_back(Json{{"n_c", k}, {"n_d", d.photons - k}, {"probability", d.probs[k]}});
    }
    return Json{{"state", state_json(s)}, {"phase", d.phase}, {"probs", rows}};
}

inline Json peak_report_json(const PosteriorDensity& post, std::span<const Peak> peaks,
                             const PeakFit* fit) {
    Json list = Json::array();
    for (const auto& pk : peaks) list.push_back(Json{{"center", pk.center}, {"height", pk.height}});
    Json j{{"outcome", outcome_json(post.outcome)}, {"peaks", list}, {"fit", nullptr}};
    if (fit) {
        j["fit"] = Json{{"center", fit->center},
                        {"width", fit->width},
                        {"amplitude", fit->amplitude},
                        {"residual", fit->residual}};
    }
    j["evidence"] = post.evidence;
    return j;
}

inline void write_probs_csv(std::ostream& os, const OutcomeDistribution& d) {
    os << "n_c,n_d,probability\n";
    for (int k = 0; k <= d.photons; ++k) {
        os << k << ',' << d.photons - k << ',' << format_double(d.probs[k]) << '\n';
    }
}

inline void write_posterior_csv(std::ostream& os, const PosteriorDensity& post) {
    os << "phi,density\n";
    for (std::size_t i = 0; i < post.phi.size(); ++i) {
        os << format_double(post.phi[i]) << ',' << format_double(post.density[i]) << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
    os << "N,state,H_bits,quad_error\n";
    for (const auto& r : rows) {
        os << r.photons << ',' << to_string(r.state) << ',' << format_double(r.result.bits) << ','
           << format_double(r.result.quad_error) << '\n';
    }
}

inline Json sweep_json(const Prior& p, const numerics::QuadratureConfig& q, std::span<const SweepRow> rows) {
    Json list = Json::array();
    for (const auto& r : rows) {
        list.push_back(Json{{"N", r.photons},
                            {"state", to_string(r.state)},
                            {"H_bits", r.result.bits},
                            {"quad_error", r.result.quad_error},
                            {"converged", r.result.converged}});
    }
    return Json{{"prior", prior_json(p)}, {"quadrature", quadrature_json(q)}, {"rows", list}};
}

}  // namespace mzsense::io
