#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hashbreak::dctlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Orthonormal DCT-II matrix, 0-based:
//   M(i, j) = sqrt(2/k) * L(i) * cos(pi/k * (j + 1/2) * i),  L(0) = 1/sqrt(2), else 1.
Matrix dct_matrix(std::size_t k);

// The DCT feature map of a k x k image restricted to rows/columns a..b
// (0-based, inclusive) of M X M^T. With c = b - a + 1 and M' the c x k slice
// of M, the map is X -> M' X M'^T, i.e. a linear operator A : R^{k^2} -> R^{c^2}
// on row-major flattened images. A is never formed unless asked for.
class DctMap {
public:
    // Throws InvalidRange unless 0 <= a <= b < k.
    DctMap(std::size_t k, std::size_t a, std::size_t b);

    std::size_t k() const noexcept { return k_; }
    std::size_t a() const noexcept { return a_; }
    std::size_t b() const noexcept { return b_; }
    std::size_t c() const noexcept { return b_ - a_ + 1; }
    std::size_t input_size() const noexcept { return k_ * k_; }
    std::size_t output_size() const noexcept { return c() * c(); }

    const Matrix& m() const noexcept { return m_; }
    const Matrix& m_prime() const noexcept { return m_prime_; }

    // A x, computed as M' X M'^T flattened row-major. Throws ShapeMismatch.
    std::vector<double> apply(std::span<const double> x) const;

    // A^T y: the image whose features are y and which lies in the row space.
    std::vector<double> apply_transpose(std::span<const double> y) const;

    // Orthogonal projection A^T A x onto the row space of A.
    std::vector<double> project_row_space(std::span<const double> x) const;

    // A built entry by entry from A(c1*c + c2, k1*k + k2) = M'(c1,k1) * M'(c2,k2).
    Matrix materialize() const;

    // Orthonormal basis of the eigenvalue-1 eigenspace of A^T A: the flattened
    // outer products of M' rows, one column per (c1, c2) in row-major order.
    Matrix row_space_basis() const;

    // Orthonormal basis of ker(A): flattened outer products of the remaining
    // DCT row pairs (i, j) with i or j outside [a, b].
    Matrix kernel_basis() const;

private:
    std::size_t k_, a_, b_;
    Matrix m_;
    Matrix m_prime_;
};

// Numerical certificate of the DCT linear-algebra properties at (k, a, b).
struct PropertyReport {
    std::size_t k = 0, a = 0, b = 0, c = 0;
    double orthogonality_residual = 0;    // max |M M^T - I|
    double slice_residual = 0;            // max |M' M'^T - I|
    double aat_residual = 0;              // max |A A^T - I|
    double operator_residual = 0;         // max |apply(x) - A x| over basis probes
    std::size_t unit_eigenvalues = 0;
    std::size_t null_eigenvalues = 0;
    std::size_t other_eigenvalues = 0;
    bool eigensolver_used = false;        // false -> counts come from rank
    std::vector<double> spectrum;         // ascending, only when eigensolver_used

    bool ok(double orth_tol = 1e-10, double aat_tol = 1e-9) const noexcept;
};

// Runs the checks. A symmetric eigensolve of A^T A is used when k <= max_eig_k,
// otherwise multiplicities are derived from rank(A) (A A^T = I already forces
// every eigenvalue into {0, 1}).
PropertyReport verify_properties(std::size_t k, std::size_t a, std::size_t b,
                                 std::size_t max_eig_k = 16, double eig_tol = 1e-8);

} // namespace hashbreak::dctlab
