#pragma once

#include <Eigen/Dense>
#include <complex>

#include "schlesinger/errors.hpp"

namespace schlesinger {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowVector = Eigen::RowVectorXcd;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Index of the largest-magnitude component; a tie picks the lowest index.
inline Eigen::Index largest_component(const Vector& v) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > best) {
            best = a;
            pivot = i;
        }
    }
    return pivot;
}

// Scales v so its largest-magnitude component becomes exactly 1; a tie picks
// the lowest index. This is the gauge convention used for every eigenvector
// column produced by the library.
inline Vector gauge_normalize(const Vector& v) {
    const Eigen::Index pivot = largest_component(v);
    if (std::abs(v[pivot]) <= 0.0) throw RankMismatch("gauge_normalize: zero vector");
    return v / v[pivot];
}

// Basis of the right kernel of M, as columns; rank is decided by the
// relative singular-value threshold.
inline Matrix kernel_basis(const Matrix& m, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = (sv.size() > 0 ? sv(0) : 0.0) * rel_tol;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    const Eigen::Index dim = m.cols() - rank;
    return svd.matrixV().rightCols(dim);
}

// Direction of a kernel that is expected to be exactly one-dimensional.
// `dimension` reports what the threshold actually found so callers can raise
// a domain-specific error when the expectation fails.
struct KernelDirection {
    int dimension = 0;
    Vector direction;
};

inline KernelDirection unique_kernel_direction(const Matrix& m, double rel_tol = 1e-8) {
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = (sv.size() > 0 ? sv(0) : 0.0) * rel_tol;
    KernelDirection result;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= cutoff) ++result.dimension;
    result.direction = svd.matrixV().col(m.cols() - 1);
    return result;
}

// Rows spanning the left kernel of M (vectors w with w * M = 0; the dagger in
// this library is a formal transpose, never a conjugation).
inline Matrix left_kernel_rows(const Matrix& m, double rel_tol = 1e-10) {
    return kernel_basis(m.transpose(), rel_tol).transpose();
}

inline double reciprocal_condition(const Matrix& m) {
    if (m.size() == 0) return 1.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0) return 0.0;
    return sv(sv.size() - 1) / sv(0);
}

}  // namespace schlesinger
