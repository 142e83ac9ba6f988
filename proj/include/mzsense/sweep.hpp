#pragma once

#include <algorithm>
#include <future>
#include <vector>

#include "mzsense/fidelity.hpp"

namespace mzsense {

struct SweepRow {
    int photons;
    StateKind state;
    FidelityResult result;
};

/// Fidelity of Fock and N00N input for every N in [n_min, n_max] under one
/// prior and one quadrature config.  Rows are ordered by (N, fock before
/// noon) whatever the number of worker threads.
inline std::vector<SweepRow> sweep_fidelity(int n_min, int n_max, const Prior& prior,
                                            const numerics::QuadratureConfig& quad = {},
                                            unsigned threads = 1) {
    if (n_min < 1 || n_max < n_min) throw InvalidPhotonNumber("sweep: invalid photon range");
    struct Job {
        int photons;
        StateKind kind;
    };
    std::vector<Job> jobs;
    for (int n = n_min; n <= n_max; ++n) {
        jobs.push_back({n, StateKind::fock});
        jobs.push_back({n, StateKind::noon});
    }
    auto run = [&](const Job& j) {
        const auto state = j.kind == StateKind::fock ? fock_input(j.photons) : noon_input(j.photons);
        return SweepRow{j.photons, j.kind, evaluate_mutual_information(state, prior, quad)};
    };

    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    const std::size_t batch = std::max(1u, threads);
    for (std::size_t start = 0; start < jobs.size(); start += batch) {
        const std::size_t end = std::min(jobs.size(), start + batch);
        if (batch == 1) {
            rows.push_back(run(jobs[start]));
            continue;
        }
        std::vector<std::future<SweepRow>> pending;
        for (std::size_t i = start; i < end; ++i) {
            pending.push_back(std::async(std::launch::async, run, jobs[i]));
        }
        for (auto& f : pending) rows.push_back(f.get());
    }
    return rows;
}

}  // namespace mzsense
