#pragma once

// Bipartite structure of states and operators on C^dA (x) C^dB: Schmidt
// decomposition, purity, the local/coupling split of a Hamiltonian, the
// bi-orthogonal coupling coefficient and two-qubit unitary classification.

#include <string_view>

#include "entfree/numerics.hpp"

namespace entfree {

inline constexpr double kNormTol = 1e-12;
inline constexpr double kProductTol = 1e-8;
inline constexpr double kClassifierTol = 1e-8;

// Pure state of a bipartite system. Amplitude i*dB + j multiplies
// |i>_A (x) |j>_B.
class BipartiteState {
public:
    // Throws PreconditionError unless |norm - 1| <= tol.
    BipartiteState(Index dA, Index dB, ComplexVector amplitudes, double tol = kNormTol);

    static BipartiteState product(const ComplexVector& a, const ComplexVector& b);
    // Rescales `raw` to unit norm.
    static BipartiteState normalised(Index dA, Index dB, ComplexVector raw);

    Index dim_a() const { return dA_; }
    Index dim_b() const { return dB_; }
    const ComplexVector& amplitudes() const { return amplitudes_; }

    // dA x dB matrix with entry (i, j) = amplitude of |i>|j>.
    ComplexMatrix amplitude_matrix() const;
    ComplexMatrix projector() const;

private:
    Index dA_;
    Index dB_;
    ComplexVector amplitudes_;
};

struct SchmidtDecomposition {
    RealVector coefficients; // descending, min(dA, dB) entries
    ComplexMatrix left;      // dA x dA unitary, column k pairs with coefficients(k)
    ComplexMatrix right;     // dB x dB unitary

    // sum_k coefficients(k) * left.col(k) (x) right.col(k)
    ComplexVector reconstruct() const;
};

// SVD of the amplitude matrix. The first component of magnitude above 1e-8
// of every left vector is made real and positive; the paired right vector
// absorbs the conjugate phase.
SchmidtDecomposition schmidt_decompose(const BipartiteState& state);

// Reduced density matrix with `traced` removed.
ComplexMatrix reduced_density(const BipartiteState& state, Subsystem traced);

// Tr rho_A^2 computed from the Schmidt coefficients (sum of alpha^4).
double purity(const BipartiteState& state);
// Tr rho_A^2 computed from the reduced density matrix.
double purity_from_reduced(const BipartiteState& state);
inline double linear_entropy(const BipartiteState& state) { return 1.0 - purity(state); }

// True iff the second Schmidt coefficient is strictly below tol.
bool is_product(const BipartiteState& state, double tol = kProductTol);

// H = local_a (x) I + I (x) local_b + scalar * I + coupling, with traceless
// locals and a coupling whose partial traces both vanish. The four pieces are
// mutually Hilbert-Schmidt orthogonal, so the split is unique.
struct HamiltonianDecomposition {
    ComplexMatrix local_a;
    ComplexMatrix local_b;
    double scalar = 0.0;
    ComplexMatrix coupling;
    double coupling_norm = 0.0;

    ComplexMatrix reconstruct() const;
};

HamiltonianDecomposition factorise_hamiltonian(const ComplexMatrix& h, Index dA, Index dB,
                                               double tol = kHermitianTol);

// C = || (Q_A (x) Q_B) H (psi_A (x) psi_B) ||^2 with Q_X = I - |psi_X><psi_X|:
// the weight H moves from the product state onto product states orthogonal to
// it on both sides. Energy squared units.
double coupling_coefficient(const ComplexMatrix& h, const ComplexVector& psiA,
                            const ComplexVector& psiB);

// Singular values of the realigned operator R[(i,j),(k,l)] = U[(i,k),(j,l)],
// i.e. the coefficients of U in a Hilbert-Schmidt orthonormal product basis.
RealVector operator_schmidt_coefficients(const ComplexMatrix& u, Index dA, Index dB);

struct UnitaryClass {
    enum class Tag { Local, SwapLocal, Entangling };
    Tag tag = Tag::Entangling;
    RealVector operator_schmidt_coefficients;
};

std::string_view to_string(UnitaryClass::Tag tag);

// Local if U has operator-Schmidt rank one, SwapLocal if U * SWAP does,
// Entangling otherwise. Rank counts coefficients above tol times the largest.
UnitaryClass classify_unitary_2q(const ComplexMatrix& u, double tol = kClassifierTol);

}  // namespace entfree
