#pragma once

// Dense complex linear algebra used throughout the library. Matrices are
// row-major so that the bipartite index of |i>_A (x) |j>_B is i*d_B + j.

#include <complex>

#include <Eigen/Dense>

namespace entfree {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr Index kMaxBipartiteDim = 4096;
inline constexpr Index kMaxKronEntries = Index{1} << 24;

enum class Subsystem { A, B };

ComplexMatrix identity(Index n);

// Kronecker product; entry ((i,k),(j,l)) = a(i,j) * b(k,l).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);

// Trace out `traced` from an operator on C^dA (x) C^dB. Tracing B returns a
// dA x dA matrix, tracing A returns dB x dB.
ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem traced, Index dA, Index dB);

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);
bool is_unitary(const ComplexMatrix& u, double tol = kUnitaryTol);

struct HermitianEigen {
    RealVector values;     // ascending
    ComplexMatrix vectors; // columns are eigenvectors
};

HermitianEigen eigh(const ComplexMatrix& h, double tol = kHermitianTol);

/// exp(i * s * H) for Hermitian H, built from the spectral decomposition so
/// the result is unitary to roundoff. Throws PreconditionError if H is not
/// Hermitian within `tol`.
ComplexMatrix hermitian_expm(const ComplexMatrix& h, double s, double tol = kHermitianTol);

struct Svd {
    RealVector singular_values; // descending
    ComplexMatrix u;
    ComplexMatrix v;            // m = u * diag(s) * v^dagger
};

Svd svd(const ComplexMatrix& m, bool full_bases = false);
RealVector singular_values(const ComplexMatrix& m);

// Hilbert-Schmidt inner product Tr(A^dagger B).
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);
double hs_norm(const ComplexMatrix& a);

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

namespace gates {
ComplexMatrix sigma_x();
ComplexMatrix sigma_y();
ComplexMatrix sigma_z();
ComplexMatrix swap();
ComplexMatrix cnot();
}  // namespace gates

}  // namespace entfree
