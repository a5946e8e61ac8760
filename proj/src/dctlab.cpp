#include "hashbreak/dctlab.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "hashbreak/errors.hpp"

namespace hashbreak::dctlab {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstImageMap = Eigen::Map<const RowMajor>;
using ImageMap = Eigen::Map<RowMajor>;

double max_abs_identity_residual(const Matrix& g) {
    return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

} // namespace

Matrix dct_matrix(std::size_t k) {
    if (k == 0) throw InvalidRange("DCT size must be at least 1");
    Matrix m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    const double kd = static_cast<double>(k);
    const double scale = std::sqrt(2.0 / kd);
    for (std::size_t i = 0; i < k; ++i) {
        const double lambda = i == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
        for (std::size_t j = 0; j < k; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                scale * lambda *
                std::cos(std::numbers::pi / kd * (static_cast<double>(j) + 0.5) *
                         static_cast<double>(i));
        }
    }
    return m;
}

DctMap::DctMap(std::size_t k, std::size_t a, std::size_t b) : k_(k), a_(a), b_(b) {
    if (k == 0 || a > b || b >= k) {
        throw InvalidRange("need 0 <= a <= b < k, got k=" + std::to_string(k) +
                           " a=" + std::to_string(a) + " b=" + std::to_string(b));
    }
    m_ = dct_matrix(k);
    m_prime_ = m_.middleRows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c()));
}

std::vector<double> DctMap::apply(std::span<const double> x) const {
    if (x.size() != input_size()) {
        throw ShapeMismatch("DCT map expects " + std::to_string(input_size()) + " inputs, got " +
                            std::to_string(x.size()));
    }
    const auto ki = static_cast<Eigen::Index>(k_);
    const auto ci = static_cast<Eigen::Index>(c());
    ConstImageMap img(x.data(), ki, ki);
    std::vector<double> out(output_size());
    ImageMap(out.data(), ci, ci).noalias() = (m_prime_ * img) * m_prime_.transpose();
    return out;
}

std::vector<double> DctMap::apply_transpose(std::span<const double> y) const {
    if (y.size() != output_size()) {
        throw ShapeMismatch("DCT map transpose expects " + std::to_string(output_size()) +
                            " inputs, got " + std::to_string(y.size()));
    }
    const auto ki = static_cast<Eigen::Index>(k_);
    const auto ci = static_cast<Eigen::Index>(c());
    ConstImageMap coeffs(y.data(), ci, ci);
    std::vector<double> out(input_size());
    ImageMap(out.data(), ki, ki).noalias() = (m_prime_.transpose() * coeffs) * m_prime_;
    return out;
}

std::vector<double> DctMap::project_row_space(std::span<const double> x) const {
    return apply_transpose(apply(x));
}

Matrix DctMap::materialize() const {
    const std::size_t cc = c();
    Matrix a(static_cast<Eigen::Index>(cc * cc), static_cast<Eigen::Index>(k_ * k_));
    for (std::size_t c1 = 0; c1 < cc; ++c1) {
        for (std::size_t c2 = 0; c2 < cc; ++c2) {
            for (std::size_t k1 = 0; k1 < k_; ++k1) {
                for (std::size_t k2 = 0; k2 < k_; ++k2) {
                    a(static_cast<Eigen::Index>(c1 * cc + c2),
                      static_cast<Eigen::Index>(k1 * k_ + k2)) =
                        m_prime_(static_cast<Eigen::Index>(c1), static_cast<Eigen::Index>(k1)) *
                        m_prime_(static_cast<Eigen::Index>(c2), static_cast<Eigen::Index>(k2));
                }
            }
        }
    }
    return a;
}

Matrix DctMap::row_space_basis() const {
    const auto ki = static_cast<Eigen::Index>(k_);
    const auto cc = static_cast<Eigen::Index>(c());
    Matrix basis(ki * ki, cc * cc);
    for (Eigen::Index c1 = 0; c1 < cc; ++c1) {
        for (Eigen::Index c2 = 0; c2 < cc; ++c2) {
            const Eigen::Index col = c1 * cc + c2;
            for (Eigen::Index k1 = 0; k1 < ki; ++k1) {
                for (Eigen::Index k2 = 0; k2 < ki; ++k2) {
                    basis(k1 * ki + k2, col) = m_prime_(c1, k1) * m_prime_(c2, k2);
                }
            }
        }
    }
    return basis;
}

Matrix DctMap::kernel_basis() const {
    const auto ki = static_cast<Eigen::Index>(k_);
    const auto lo = static_cast<Eigen::Index>(a_);
    const auto hi = static_cast<Eigen::Index>(b_);
    const auto cc = static_cast<Eigen::Index>(c());
    Matrix basis(ki * ki, ki * ki - cc * cc);
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < ki; ++i) {
        for (Eigen::Index j = 0; j < ki; ++j) {
            if (i >= lo && i <= hi && j >= lo && j <= hi) continue;
            for (Eigen::Index k1 = 0; k1 < ki; ++k1) {
                for (Eigen::Index k2 = 0; k2 < ki; ++k2) {
                    basis(k1 * ki + k2, col) = m_(i, k1) * m_(j, k2);
                }
            }
            ++col;
        }
    }
    return basis;
}

bool PropertyReport::ok(double orth_tol, double aat_tol) const noexcept {
    const std::size_t expected_unit = c * c;
    return orthogonality_residual <= orth_tol && slice_residual <= orth_tol &&
           aat_residual <= aat_tol && operator_residual <= aat_tol &&
           unit_eigenvalues == expected_unit && null_eigenvalues == k * k - expected_unit &&
           other_eigenvalues == 0;
}

PropertyReport verify_properties(std::size_t k, std::size_t a, std::size_t b,
                                 std::size_t max_eig_k, double eig_tol) {
    const DctMap map(k, a, b);
    PropertyReport r;
    r.k = k;
    r.a = a;
    r.b = b;
    r.c = map.c();
    r.orthogonality_residual = max_abs_identity_residual(map.m() * map.m().transpose());
    r.slice_residual = max_abs_identity_residual(map.m_prime() * map.m_prime().transpose());

    const Matrix a_mat = map.materialize();
    r.aat_residual = max_abs_identity_residual(a_mat * a_mat.transpose());

    // Cross-check the operator form against the entrywise matrix.
    std::mt19937_64 gen(0x5eedULL + k * 1000 + a * 10 + b);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int probe = 0; probe < 4; ++probe) {
        Vector x(static_cast<Eigen::Index>(k * k));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unit(gen);
        const auto fast = map.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        const Vector dense = a_mat * x;
        for (Eigen::Index i = 0; i < dense.size(); ++i) {
            r.operator_residual = std::max(r.operator_residual,
                                           std::abs(dense(i) - fast[static_cast<std::size_t>(i)]));
        }
    }

    if (k <= max_eig_k) {
        r.eigensolver_used = true;
        const Matrix ata = a_mat.transpose() * a_mat;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(ata, Eigen::EigenvaluesOnly);
        const Vector& ev = solver.eigenvalues();
        r.spectrum.assign(ev.data(), ev.data() + ev.size());
        for (double v : r.spectrum) {
            if (std::abs(v - 1.0) <= eig_tol) ++r.unit_eigenvalues;
            else if (std::abs(v) <= eig_tol) ++r.null_eigenvalues;
            else ++r.other_eigenvalues;
        }
    } else {
        Eigen::ColPivHouseholderQR<Matrix> qr(a_mat.transpose());
        qr.setThreshold(eig_tol);
        const auto rank = static_cast<std::size_t>(qr.rank());
        r.unit_eigenvalues = rank;
        r.null_eigenvalues = k * k - rank;
        r.other_eigenvalues = r.aat_residual <= eig_tol ? 0 : k * k;
    }
    return r;
}

} // namespace hashbreak::dctlab
