#pragma once

// Seeded random instances. Every random quantity in the library, the CLI and
// the verification suite is drawn from std::mt19937_64 seeded with a single
// user-visible integer, so runs are reproducible on a given platform.

#include <cstdint>
#include <random>

#include "entfree/numerics.hpp"

namespace entfree {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_(engine_); }
    Complex complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re, im};
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Gaussian unitary ensemble sample: (G + G^dagger) / 2 with i.i.d. complex
// normal entries of G, multiplied by `scale`.
ComplexMatrix random_hermitian(Index n, Rng& rng, double scale = 1.0);

// Uniformly distributed (Haar) pure state.
ComplexVector random_state(Index n, Rng& rng);

// Haar unitary via QR of a complex Ginibre matrix with phase correction.
ComplexMatrix random_unitary(Index n, Rng& rng);

// Full-rank mixed state W W^dagger / Tr(W W^dagger).
ComplexMatrix random_density(Index n, Rng& rng);

// H_A (x) I + I (x) H_B with independent GUE locals.
ComplexMatrix random_factorisable_hamiltonian(Index dA, Index dB, Rng& rng, double scale = 1.0);

}  // namespace entfree
