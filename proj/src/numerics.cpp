#include "entfree/numerics.hpp"

#include <cmath>
#include <string>

#include "entfree/errors.hpp"

namespace entfree {

namespace {

using ColMatrix = Eigen::MatrixXcd;

// Below this size Jacobi is cheap and the most accurate choice.
constexpr Index kJacobiLimit = 64;

}  // namespace

ComplexMatrix identity(Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Index rows = a.rows() * b.rows();
    const Index cols = a.cols() * b.cols();
    require(a.size() > 0 && b.size() > 0, "kron: empty operand");
    require(rows <= kMaxKronEntries / cols, "kron: result exceeds 2^24 entries");
    ComplexMatrix out(rows, cols);
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    require(a.size() > 0 && b.size() > 0, "kron: empty operand");
    require(a.size() <= kMaxKronEntries / b.size(), "kron: result exceeds 2^24 entries");
    ComplexVector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, Subsystem traced, Index dA, Index dB) {
    require(dA > 0 && dB > 0, "partial_trace: dimensions must be positive");
    require(m.rows() == dA * dB && m.cols() == dA * dB,
            "partial_trace: operator is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols()) + ", expected square of dimension " +
                std::to_string(dA * dB));
    if (traced == Subsystem::B) {
        ComplexMatrix out = ComplexMatrix::Zero(dA, dA);
        for (Index i = 0; i < dA; ++i)
            for (Index k = 0; k < dA; ++k)
                out(i, k) = m.block(i * dB, k * dB, dB, dB).trace();
        return out;
    }
    ComplexMatrix out = ComplexMatrix::Zero(dB, dB);
    for (Index i = 0; i < dA; ++i) out += m.block(i * dB, i * dB, dB, dB);
    return out;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return max_abs_diff(u.adjoint() * u, identity(u.rows())) <= tol;
}

HermitianEigen eigh(const ComplexMatrix& h, double tol) {
    require(is_hermitian(h, tol), "eigh: matrix is not Hermitian");
    // Symmetrise so roundoff-level asymmetry does not leak into the spectrum.
    const ColMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<ColMatrix> solver(sym);
    require(solver.info() == Eigen::Success, "eigh: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix hermitian_expm(const ComplexMatrix& h, double s, double tol) {
    require(is_hermitian(h, tol), "hermitian_expm: matrix is not Hermitian");
    const HermitianEigen eig = eigh(h, tol);
    ComplexVector phases(eig.values.size());
    for (Index k = 0; k < phases.size(); ++k)
        phases(k) = std::polar(1.0, s * eig.values(k));
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

Svd svd(const ComplexMatrix& m, bool full_bases) {
    const ColMatrix a = m;
    const unsigned options = full_bases ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                                        : (Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (std::max(a.rows(), a.cols()) <= kJacobiLimit) {
        Eigen::JacobiSVD<ColMatrix> solver(a, options);
        return {solver.singularValues(), solver.matrixU(), solver.matrixV()};
    }
    Eigen::BDCSVD<ColMatrix> solver(a, options);
    return {solver.singularValues(), solver.matrixU(), solver.matrixV()};
}

RealVector singular_values(const ComplexMatrix& m) {
    const ColMatrix a = m;
    if (std::max(a.rows(), a.cols()) <= kJacobiLimit)
        return Eigen::JacobiSVD<ColMatrix>(a).singularValues();
    return Eigen::BDCSVD<ColMatrix>(a).singularValues();
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "hs_inner: shape mismatch");
    return (a.conjugate().cwiseProduct(b)).sum();
}

double hs_norm(const ComplexMatrix& a) { return std::sqrt(a.cwiseAbs2().sum()); }

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: shape mismatch");
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

namespace gates {

ComplexMatrix sigma_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

ComplexMatrix sigma_y() {
    const Complex i{0.0, 1.0};
    ComplexMatrix m(2, 2);
    m << 0, -i, i, 0;
    return m;
}

ComplexMatrix sigma_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

ComplexMatrix swap() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
    return m;
}

ComplexMatrix cnot() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return m;
}

}  // namespace gates

}  // namespace entfree
