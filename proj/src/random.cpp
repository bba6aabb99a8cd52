#include "entfree/random.hpp"

#include <cmath>

#include "entfree/errors.hpp"

namespace entfree {

ComplexMatrix random_hermitian(Index n, Rng& rng, double scale) {
    require(n > 0, "random_hermitian: dimension must be positive");
    ComplexMatrix g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    ComplexMatrix h = 0.5 * scale * (g + g.adjoint());
    return h;
}

ComplexVector random_state(Index n, Rng& rng) {
    require(n > 0, "random_state: dimension must be positive");
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

ComplexMatrix random_unitary(Index n, Rng& rng) {
    require(n > 0, "random_unitary: dimension must be positive");
    Eigen::MatrixXcd g(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0) q.col(j) *= r(j, j) / mag;
    }
    return q;
}

ComplexMatrix random_density(Index n, Rng& rng) {
    require(n > 0, "random_density: dimension must be positive");
    ComplexMatrix w(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) w(i, j) = rng.complex_normal();
    ComplexMatrix rho = w * w.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

ComplexMatrix random_factorisable_hamiltonian(Index dA, Index dB, Rng& rng, double scale) {
    const ComplexMatrix hA = random_hermitian(dA, rng, scale);
    const ComplexMatrix hB = random_hermitian(dB, rng, scale);
    return kron(hA, identity(dB)) + kron(identity(dA), hB);
}

}  // namespace entfree
