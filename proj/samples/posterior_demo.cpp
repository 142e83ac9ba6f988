// Prints the posterior peaks for every outcome of a Fock and a N00N input
// under a flat prior, then the mutual information of both.
//
//   posterior_demo [N]

#include <cstdio>
#include <cstdlib>

#include "mzsense/mzsense.hpp"

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 3;
    if (n < 1 || n > 40) {
        std::fprintf(stderr, "usage: posterior_demo [N in 1..40]\n");
        return 2;
    }
    const auto prior = mzsense::uniform_prior();

    for (const auto& state : {mzsense::fock_input(n), mzsense::noon_input(n)}) {
        std::printf("%s input, N = %d\n", mzsense::to_string(state.kind()).c_str(), n);
        for (int nc = 0; nc <= n; ++nc) {
            const mzsense::Outcome m{nc, n - nc};
            try {
                const auto post = mzsense::posterior(state, m, prior);
                const auto peaks = mzsense::find_peaks(post);
                std::printf("  (%d,%d)  evidence %.6f  peaks:", m.n_c, m.n_d, post.evidence);
                for (const auto& p : peaks) std::printf(" %+.4f", p.center);
                std::printf("\n");
            } catch (const mzsense::ImpossibleOutcome&) {
                std::printf("  (%d,%d)  never observed\n", m.n_c, m.n_d);
            }
        }
        const auto h = mzsense::mutual_information(state, prior);
        std::printf("  H = %.9f bits\n\n", h.bits);
    }
}
