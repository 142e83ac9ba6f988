// mzsense-cli: probability tables, posteriors, fidelity values, sweeps and
// the peak-width scaling fit, as CSV or JSON.
//
// Exit codes: 0 success, 2 usage, 3 impossible outcome, 4 quadrature
// non-convergence (best estimate still written).

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mzsense/io.hpp"
#include "mzsense/mzsense.hpp"

namespace {

using mzsense::io::Json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_impossible = 3;
constexpr int exit_nonconverged = 4;
constexpr int photon_soft_cap = 40;

constexpr double reference_prefactor = 0.897;
constexpr double reference_exponent = 0.477;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string state = "fock";
    std::string photons;
    std::string prior = "uniform";
    std::string format = "csv";
    std::string out;
    bool allow_large = false;
    double phase = 0.0;
    std::string outcome;
    int grid = mzsense::default_grid_points;
    bool peaks = false;
    std::optional<int> fit_peak;
    unsigned jobs = 1;
    std::string outcome_policy = "all-in-d";
    std::string peak_choice = "highest";
    bool self_test = false;
    int fisher_grid = 0;
    mzsense::numerics::QuadratureConfig quad;
};

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(opt.out, std::ios::binary);
    if (!f) throw UsageError("cannot write to " + opt.out);
    f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void check_photons(const Options& opt, int n) {
    if (n < 1) throw UsageError("photon number must be >= 1");
    if (n > photon_soft_cap && !opt.allow_large) {
        throw UsageError("photon number " + std::to_string(n) + " exceeds " +
                         std::to_string(photon_soft_cap) + "; pass --allow-large to override");
    }
}

int single_photons(const Options& opt) {
    if (opt.photons.empty()) throw UsageError("--photons is required");
    const auto [lo, hi] = mzsense::io::parse_photon_range(opt.photons);
    if (lo != hi) throw UsageError("this command takes a single photon number");
    check_photons(opt, lo);
    return lo;
}

std::pair<int, int> photon_range(const Options& opt, const std::string& fallback) {
    const auto [lo, hi] = mzsense::io::parse_photon_range(opt.photons.empty() ? fallback : opt.photons);
    check_photons(opt, lo);
    check_photons(opt, hi);
    return {lo, hi};
}

mzsense::TwoModeState make_state(const Options& opt, int n) {
    if (opt.state == "fock") return mzsense::fock_input(n);
    if (opt.state == "noon") return mzsense::noon_input(n);
    throw UsageError("--state must be fock or noon");
}

void check_phase(double phi) {
    if (!(phi > -std::numbers::pi && phi <= std::numbers::pi)) {
        throw UsageError("--phase must lie in (-pi, pi]");
    }
}

void check_format(const Options& opt) {
    if (opt.format != "csv" && opt.format != "json") throw UsageError("--format must be csv or json");
}

int run_probs(const Options& opt) {
    check_format(opt);
    check_phase(opt.phase);
    const auto state = make_state(opt, single_photons(opt));
    const auto dist = mzsense::outcome_distribution(state, opt.phase);
    if (opt.format == "json") {
        emit(opt, dump(mzsense::io::probs_json(state, dist)));
    } else {
        std::ostringstream os;
        mzsense::io::write_probs_csv(os, dist);
        emit(opt, os.str());
    }
    return exit_ok;
}

int run_posterior(const Options& opt) {
    const auto state = make_state(opt, single_photons(opt));
    if (opt.outcome.empty()) throw UsageError("--outcome is required");
    const auto outcome = mzsense::io::parse_outcome(opt.outcome);
    const auto prior = mzsense::io::parse_prior_spec(opt.prior);
    const auto post = mzsense::posterior(state, outcome, prior, opt.grid, opt.quad);
    if (!opt.peaks && !opt.fit_peak) {
        std::ostringstream os;
        mzsense::io::write_posterior_csv(os, post);
        emit(opt, os.str());
        return exit_ok;
    }
    const auto peaks = mzsense::find_peaks(post);
    std::optional<mzsense::PeakFit> fit;
    if (opt.fit_peak) {
        if (*opt.fit_peak < 0 || static_cast<std::size_t>(*opt.fit_peak) >= peaks.size()) {
            throw UsageError("--fit index " + std::to_string(*opt.fit_peak) + " but " +
                             std::to_string(peaks.size()) + " peaks found");
        }
        fit = mzsense::gaussian_peak_fit(post, peaks[*opt.fit_peak].center);
    }
    emit(opt, dump(mzsense::io::peak_report_json(post, peaks, fit ? &*fit : nullptr)));
    return exit_ok;
}

int run_fidelity(const Options& opt) {
    const auto state = make_state(opt, single_photons(opt));
    const auto prior = mzsense::io::parse_prior_spec(opt.prior);
    const auto result = mzsense::evaluate_mutual_information(state, prior, opt.quad);
    emit(opt, dump(mzsense::io::fidelity_json(state, prior, result)));
    if (!result.converged) {
        std::cerr << "error: quadrature did not converge (error estimate " << result.quad_error << ")\n";
        return exit_nonconverged;
    }
    return exit_ok;
}

int run_approx(const Options& opt) {
    const auto state = make_state(opt, single_photons(opt));
    const auto prior = mzsense::io::parse_prior_spec(opt.prior);
    const auto result = mzsense::narrow_prior_approx(state, prior, mzsense::MzConvention::standard(), opt.quad);
    emit(opt, dump(mzsense::io::approx_json(state, prior, result)));
    return exit_ok;
}

int run_sweep(const Options& opt) {
    check_format(opt);
    const auto [lo, hi] = photon_range(opt, "");
    const auto prior = mzsense::io::parse_prior_spec(opt.prior);
    const auto rows = mzsense::sweep_fidelity(lo, hi, prior, opt.quad, opt.jobs);
    bool failed = false;
    for (const auto& r : rows) {
        if (!r.result.converged) {
            failed = true;
            std::cerr << "warning: N=" << r.photons << " " << mzsense::to_string(r.state)
                      << " did not converge (error estimate " << r.result.quad_error << ")\n";
        }
    }
    if (opt.format == "json") {
        emit(opt, dump(mzsense::io::sweep_json(prior, opt.quad, rows)));
    } else {
        std::ostringstream os;
        mzsense::io::write_sweep_csv(os, rows);
        emit(opt, os.str());
    }
    return failed ? exit_nonconverged : exit_ok;
}

mzsense::ScalingStudyOptions study_options(const Options& opt) {
    mzsense::ScalingStudyOptions s;
    s.grid_points = opt.grid;
    const auto& p = opt.outcome_policy;
    if (p == "all-in-d") {
        s.policy = mzsense::OutcomePolicy::all_in_d;
    } else if (p == "all-in-c") {
        s.policy = mzsense::OutcomePolicy::all_in_c;
    } else if (p == "balanced") {
        s.policy = mzsense::OutcomePolicy::balanced;
    } else if (p.starts_with("nc:")) {
        s.policy = mzsense::OutcomePolicy::fixed_nc;
        s.fixed_nc = mzsense::io::parse_int(std::string_view(p).substr(3), "--outcome-policy nc");
    } else {
        throw UsageError("--outcome-policy must be all-in-d, all-in-c, balanced or nc:<k>");
    }
    if (opt.peak_choice != "highest") {
        s.peak_index = mzsense::io::parse_int(opt.peak_choice, "--peak");
        if (s.peak_index < 0) throw UsageError("--peak must be 'highest' or a non-negative index");
    }
    return s;
}

int run_fit_scaling(const Options& opt) {
    const auto [lo, hi] = photon_range(opt, "1..40");
    Json report;
    if (opt.self_test) {
        std::vector<mzsense::WidthSample> widths;
        for (int n = lo; n <= hi; ++n) {
            widths.push_back({n, reference_prefactor / std::pow(n, reference_exponent)});
        }
        const auto law = mzsense::numerics::power_law_fit(
            [&] {
                std::vector<mzsense::numerics::Point> pts;
                for (const auto& w : widths) pts.push_back({double(w.photons), w.width});
                return pts;
            }());
        const bool passed = std::abs(law.prefactor - reference_prefactor) < 1e-10 &&
                            std::abs(law.exponent - reference_exponent) < 1e-10;
        report = Json{{"self_test", true},
                      {"a", law.prefactor},
                      {"b", law.exponent},
                      {"injected", Json{{"a", reference_prefactor}, {"b", reference_exponent}}},
                      {"passed", passed}};
        emit(opt, dump(report));
        return passed ? exit_ok : 1;
    }

    const auto s = study_options(opt);
    const auto study = mzsense::fock_peak_widths(lo, hi, s);
    Json widths = Json::array();
    for (const auto& w : study.widths) widths.push_back(Json{{"N", w.photons}, {"width", w.width}});
    Json excluded = Json::array();
    for (const auto& f : study.failures) {
        std::cerr << "warning: N=" << f.photons << " excluded: " << f.reason << "\n";
        excluded.push_back(Json{{"N", f.photons}, {"reason", f.reason}});
    }
    Json warnings = Json::array();
    Json a = nullptr;
    Json b = nullptr;
    if (study.widths.size() >= 3) {
        const auto fit = mzsense::scaling_fit(study.widths);
        a = fit.prefactor;
        b = fit.exponent;
    } else if (study.widths.size() == 2) {
        const std::string w = "only 2 points: the power law is determined exactly and carries no confidence";
        std::cerr << "warning: " << w << "\n";
        warnings.push_back(w);
        const std::vector<mzsense::numerics::Point> pts{
            {double(study.widths[0].photons), study.widths[0].width},
            {double(study.widths[1].photons), study.widths[1].width}};
        const auto law = mzsense::numerics::power_law_fit(pts);
        a = law.prefactor;
        b = law.exponent;
    } else {
        const std::string w = "fewer than 2 usable widths: no fit";
        std::cerr << "warning: " << w << "\n";
        warnings.push_back(w);
    }
    report = Json{{"a", a},
                  {"b", b},
                  {"reference", Json{{"a", reference_prefactor}, {"b", reference_exponent}}},
                  {"outcome_policy", opt.outcome_policy},
                  {"peak", opt.peak_choice},
                  {"grid_points", opt.grid},
                  {"widths", widths},
                  {"excluded", excluded},
                  {"warnings", warnings}};
    emit(opt, dump(report));
    return exit_ok;
}

int run_fisher(const Options& opt) {
    check_format(opt);
    const auto state = make_state(opt, single_photons(opt));
    std::vector<double> phases;
    if (opt.fisher_grid > 0) {
        phases = mzsense::phase_grid(opt.fisher_grid);
    } else {
        check_phase(opt.phase);
        phases.push_back(opt.phase);
    }
    if (opt.format == "json") {
        Json rows = Json::array();
        for (double phi : phases) {
            rows.push_back(Json{{"phase", phi}, {"fisher_information", mzsense::fisher_information(state, phi)}});
        }
        emit(opt, dump(Json{{"state", mzsense::io::state_json(state)}, {"rows", rows}}));
    } else {
        std::ostringstream os;
        os << "phase,fisher_information\n";
        for (double phi : phases) {
            os << mzsense::io::format_double(phi) << ','
               << mzsense::io::format_double(mzsense::fisher_information(state, phi)) << '\n';
        }
        emit(opt, os.str());
    }
    return exit_ok;
}

void add_common(CLI::App* cmd, Options& opt, bool with_prior) {
    cmd->add_option("--state", opt.state, "Input state: fock or noon")->check(CLI::IsMember({"fock", "noon"}));
    cmd->add_option("--photons", opt.photons, "Photon number N (or range a..b where accepted)");
    cmd->add_option("--out", opt.out, "Write output to this file instead of standard output");
    cmd->add_flag("--allow-large", opt.allow_large, "Allow photon numbers above 40");
    if (with_prior) {
        cmd->add_option("--prior", opt.prior, "uniform | gaussian:<center>,<sigma> | file:<path>");
        cmd->add_option("--base-panels", opt.quad.base_panels, "Quadrature base panels");
        cmd->add_option("--nodes", opt.quad.nodes_per_panel, "Gauss-Legendre nodes per panel");
        cmd->add_option("--max-refinements", opt.quad.max_refinements, "Panel doublings");
        cmd->add_option("--abs-tol", opt.quad.abs_tol, "Absolute tolerance between refinements");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mach-Zehnder phase sensing: outcome probabilities, posteriors and fidelity"};
    app.require_subcommand(1);
    Options opt;

    auto* probs = app.add_subcommand("probs", "Outcome distribution P(n_c, n_d | phi)");
    add_common(probs, opt, false);
    probs->add_option("--phase", opt.phase, "Phase in radians, (-pi, pi]")->required();
    probs->add_option("--format", opt.format, "csv or json");

    auto* post = app.add_subcommand("posterior", "Posterior p(phi | m) on a phase grid");
    add_common(post, opt, true);
    post->add_option("--outcome", opt.outcome, "Outcome n_c,n_d")->required();
    post->add_option("--grid", opt.grid, "Grid points on (-pi, pi]");
    post->add_flag("--peaks", opt.peaks, "Emit the JSON peak report instead of the CSV");
    post->add_option("--fit", opt.fit_peak, "Also fit a Gaussian to the peak with this index");

    auto* fid = app.add_subcommand("fidelity", "Mutual information H(Phi:M) in bits (JSON)");
    add_common(fid, opt, true);

    auto* approx = app.add_subcommand("approx", "Narrow-prior approximation of the fidelity (JSON)");
    add_common(approx, opt, true);

    auto* sweep = app.add_subcommand("sweep", "Fidelity of Fock and N00N input over a photon range");
    add_common(sweep, opt, true);
    sweep->add_option("--format", opt.format, "csv or json");
    sweep->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* scaling = app.add_subcommand("fit-scaling", "Power-law fit of Fock posterior peak widths");
    add_common(scaling, opt, false);
    scaling->add_option("--outcome-policy", opt.outcome_policy, "all-in-d | all-in-c | balanced | nc:<k>");
    scaling->add_option("--peak", opt.peak_choice, "highest or a peak index");
    scaling->add_option("--grid", opt.grid, "Grid points on (-pi, pi]");
    scaling->add_flag("--self-test", opt.self_test, "Fit an injected exact power law");

    auto* fisher = app.add_subcommand("fisher", "Classical Fisher information");
    add_common(fisher, opt, false);
    fisher->add_option("--phase", opt.phase, "Phase in radians, (-pi, pi]");
    fisher->add_option("--grid", opt.fisher_grid, "Tabulate on this many grid phases instead");
    fisher->add_option("--format", opt.format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*probs) return run_probs(opt);
        if (*post) return run_posterior(opt);
        if (*fid) return run_fidelity(opt);
        if (*approx) return run_approx(opt);
        if (*sweep) return run_sweep(opt);
        if (*scaling) return run_fit_scaling(opt);
        if (*fisher) return run_fisher(opt);
    } catch (const mzsense::ImpossibleOutcome& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_impossible;
    } catch (const mzsense::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << " (best estimate " << e.best_value() << ")\n";
        return exit_nonconverged;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const mzsense::Error& e) {
        // Invalid photon numbers, widths, outcomes and prior files are input errors.
        std::cerr << "usage error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
