#pragma once

// Fuchsian systems in Schlesinger normal form: A(x) = sum_i A_i/(x - u_i),
// with the infinity residue always derived as -sum A_i. Residues factor as
// A_i = B_i C_i(dagger) over the nonzero spectrum (dagger is the formal
// transpose throughout; no conjugation anywhere).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "schlesinger/errors.hpp"
#include "schlesinger/linalg.hpp"

namespace schlesinger {

class FuchsianSystem {
public:
    FuchsianSystem(std::vector<Complex> poles, std::vector<Matrix> residues)
        : poles_(std::move(poles)), residues_(std::move(residues)) {}

    int matrix_size() const { return static_cast<int>(residues_.front().rows()); }
    int pole_count() const { return static_cast<int>(poles_.size()); }
    Complex pole(int i) const { return poles_.at(i); }
    const std::vector<Complex>& poles() const { return poles_; }
    const Matrix& residue(int i) const { return residues_.at(i); }

    Matrix residue_at_infinity() const {
        Matrix total = Matrix::Zero(matrix_size(), matrix_size());
        for (const Matrix& a : residues_) total += a;
        return -total;
    }

    // sum_i A_i/(x - u_i); x must keep clear of every pole.
    Matrix eval_coefficient(Complex x) const {
        Matrix value = Matrix::Zero(matrix_size(), matrix_size());
        for (int i = 0; i < pole_count(); ++i) {
            const Complex gap = x - poles_[i];
            if (std::abs(gap) <= 1e-12 * (1.0 + std::abs(poles_[i])))
                throw EvaluationAtPole("evaluation point coincides with pole " +
                                       std::to_string(i));
            value += residues_[i] / gap;
        }
        return value;
    }

private:
    std::vector<Complex> poles_;
    std::vector<Matrix> residues_;
};

struct ExponentGroup {
    Complex value;
    int multiplicity;
};

struct PointSpectrum {
    bool at_infinity;
    Complex location;  // meaningful only when not at_infinity
    std::vector<ExponentGroup> groups;
    int nonzero_rank;  // matrix size minus the zero group's multiplicity
};

struct RiemannScheme {
    std::vector<PointSpectrum> points;             // finite poles, then infinity
    std::vector<std::vector<int>> spectral_type;   // multiplicity partitions per point
    Complex fuchs_sum;                             // total of all listed indices

    // Nonzero indices at finite pole i, expanded by multiplicity.
    std::vector<Complex> nonzero_exponents(int i) const {
        std::vector<Complex> out;
        for (const auto& g : points.at(i).groups) {
            if (g.value == Complex(0)) continue;
            for (int k = 0; k < g.multiplicity; ++k) out.push_back(g.value);
        }
        return out;
    }
};

struct PoleFactors {
    Complex location;
    Matrix basis;      // m x r right factor
    Matrix dual;       // r x m left factor
    Vector exponents;  // r nonzero indices, dual * basis = diag(exponents)

    int rank() const { return static_cast<int>(exponents.size()); }
    Matrix residue() const { return basis * dual; }
};

class DecompositionPoint {
public:
    DecompositionPoint(std::vector<PoleFactors> poles, Matrix infinity_target,
                       double pairing_tol = 1e-9)
        : poles_(std::move(poles)), infinity_target_(std::move(infinity_target)) {
        if (poles_.empty()) throw RankMismatch("decomposition point needs a pole");
        if (infinity_target_.rows() != infinity_target_.cols())
            throw RankMismatch("infinity target must be square");
        const int m = static_cast<int>(infinity_target_.rows());
        for (std::size_t i = 0; i < poles_.size(); ++i) {
            const PoleFactors& pf = poles_[i];
            const int r = static_cast<int>(pf.exponents.size());
            if (pf.basis.rows() != m || pf.dual.cols() != m || pf.basis.cols() != r ||
                pf.dual.rows() != r)
                throw RankMismatch("factor shapes inconsistent at pole " +
                                   std::to_string(i));
            double scale = 1.0;
            for (int j = 0; j < r; ++j) {
                if (std::abs(pf.exponents[j]) == 0.0)
                    throw RankMismatch("zero exponent at pole " + std::to_string(i));
                scale = std::max(scale, std::abs(pf.exponents[j]));
                if (max_abs(Matrix(pf.basis.col(j))) == 0.0 ||
                    max_abs(Matrix(pf.dual.row(j))) == 0.0)
                    throw RankMismatch("vanishing factor at pole " + std::to_string(i));
            }
            if (r > 0) {
                const Matrix pairing = pf.dual * pf.basis;
                const Matrix expected = pf.exponents.asDiagonal();
                if (max_abs(pairing - expected) > pairing_tol * scale)
                    throw RankMismatch("pairing violates the normalization at pole " +
                                       std::to_string(i));
            }
        }
    }

    int matrix_size() const { return static_cast<int>(infinity_target_.rows()); }
    int pole_count() const { return static_cast<int>(poles_.size()); }
    const PoleFactors& pole(int i) const { return poles_.at(i); }
    const Matrix& infinity_target() const { return infinity_target_; }

    std::vector<Complex> pole_locations() const {
        std::vector<Complex> out;
        out.reserve(poles_.size());
        for (const PoleFactors& pf : poles_) out.push_back(pf.location);
        return out;
    }

private:
    std::vector<PoleFactors> poles_;
    Matrix infinity_target_;
};

namespace detail {

// Imaginary part first: slot order is then stable under the unit real
// shifts performed by elementary transformations.
inline bool spectral_before(Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() > b.real();
}

struct EigenCluster {
    Complex mean;
    std::vector<int> members;
};

// Greedy single-linkage clustering against running means, on a
// deterministically ordered value list.
inline std::vector<EigenCluster> cluster_values(const Vector& values, double tol) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (values[a] == values[b]) return a < b;
        return spectral_before(values[a], values[b]);
    });
    std::vector<EigenCluster> clusters;
    for (int idx : order) {
        EigenCluster* best = nullptr;
        double best_gap = tol;
        for (EigenCluster& c : clusters) {
            const double gap = std::abs(values[idx] - c.mean);
            if (gap <= best_gap) {
                best_gap = gap;
                best = &c;
            }
        }
        if (best == nullptr) {
            clusters.push_back({values[idx], {idx}});
        } else {
            best->members.push_back(idx);
            const double k = static_cast<double>(best->members.size());
            best->mean += (values[idx] - best->mean) / k;
        }
    }
    return clusters;
}

// Index of the cluster representing the zero eigenvalue, or -1.
inline int zero_cluster(const std::vector<EigenCluster>& clusters, double tol) {
    int best = -1;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (std::abs(clusters[i].mean) > tol) continue;
        if (best < 0 || std::abs(clusters[i].mean) < std::abs(clusters[best].mean))
            best = static_cast<int>(i);
    }
    return best;
}

inline PointSpectrum point_spectrum(const Vector& eigenvalues, double cluster_tol,
                                    bool at_infinity, Complex location) {
    auto clusters = cluster_values(eigenvalues, cluster_tol);
    const int zero = at_infinity ? -1 : zero_cluster(clusters, cluster_tol);
    PointSpectrum spectrum;
    spectrum.at_infinity = at_infinity;
    spectrum.location = location;
    spectrum.nonzero_rank = static_cast<int>(eigenvalues.size());
    std::vector<ExponentGroup> groups;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const bool is_zero = static_cast<int>(i) == zero;
        groups.push_back({is_zero ? Complex(0) : clusters[i].mean,
                          static_cast<int>(clusters[i].members.size())});
        if (is_zero) spectrum.nonzero_rank -= groups.back().multiplicity;
    }
    std::sort(groups.begin(), groups.end(), [](const ExponentGroup& a, const ExponentGroup& b) {
        if (a.multiplicity != b.multiplicity) return a.multiplicity > b.multiplicity;
        if (a.value == b.value) return false;
        if ((a.value == Complex(0)) != (b.value == Complex(0)))
            return a.value == Complex(0);
        return spectral_before(a.value, b.value);
    });
    spectrum.groups = std::move(groups);
    return spectrum;
}

}  // namespace detail

inline FuchsianSystem build_system(std::vector<Complex> poles,
                                   std::vector<Matrix> residues) {
    if (residues.empty() || poles.size() != residues.size())
        throw NonSquareResidue("residue list must match the pole list");
    const Eigen::Index m = residues.front().rows();
    for (std::size_t i = 0; i < residues.size(); ++i)
        if (residues[i].rows() != m || residues[i].cols() != m)
            throw NonSquareResidue("residue " + std::to_string(i) +
                                   " is not square of the common size");
    double scale = 1.0;
    for (const Complex& u : poles) scale = std::max(scale, std::abs(u));
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = i + 1; j < poles.size(); ++j)
            if (std::abs(poles[i] - poles[j]) <= 1e-12 * scale)
                throw DuplicatePoles("poles " + std::to_string(i) + " and " +
                                     std::to_string(j) + " coincide");
    for (std::size_t i = 0; i < residues.size(); ++i) {
        if (max_abs(residues[i]) == 0.0) continue;
        Eigen::ComplexEigenSolver<Matrix> solver(residues[i], true);
        if (reciprocal_condition(solver.eigenvectors()) < 1e-10)
            throw NotDiagonalizable("residue at pole " + std::to_string(i) +
                                    " has no eigenvector basis");
    }
    return FuchsianSystem(std::move(poles), std::move(residues));
}

inline RiemannScheme riemann_scheme(const FuchsianSystem& system,
                                    double cluster_tol = 1e-7) {
    RiemannScheme scheme;
    Complex total = 0;
    double scale = 1.0;
    for (int i = 0; i <= system.pole_count(); ++i) {
        const bool at_infinity = i == system.pole_count();
        const Matrix a = at_infinity ? system.residue_at_infinity() : system.residue(i);
        Eigen::ComplexEigenSolver<Matrix> solver(a, false);
        scheme.points.push_back(detail::point_spectrum(
            solver.eigenvalues(), cluster_tol, at_infinity,
            at_infinity ? Complex(0) : system.pole(i)));
        std::vector<int> partition;
        for (const auto& g : scheme.points.back().groups) {
            partition.push_back(g.multiplicity);
            total += g.value * static_cast<double>(g.multiplicity);
            scale = std::max(scale, std::abs(g.value));
        }
        scheme.spectral_type.push_back(std::move(partition));
    }
    scheme.fuchs_sum = total;
    if (std::abs(total) > 1e-8 * scale)
        throw FuchsViolation("index sum " + std::to_string(std::abs(total)) +
                             " exceeds tolerance");
    return scheme;
}

inline DecompositionPoint decompose(const FuchsianSystem& system,
                                    double cluster_tol = 1e-7) {
    const int m = system.matrix_size();
    std::vector<PoleFactors> factors;
    for (int i = 0; i < system.pole_count(); ++i) {
        const Matrix& a = system.residue(i);
        PoleFactors pf;
        pf.location = system.pole(i);
        if (max_abs(a) == 0.0) {
            pf.basis = Matrix::Zero(m, 0);
            pf.dual = Matrix::Zero(0, m);
            pf.exponents = Vector::Zero(0);
            factors.push_back(std::move(pf));
            continue;
        }
        Eigen::ComplexEigenSolver<Matrix> solver(a, true);
        const Matrix& vectors = solver.eigenvectors();
        if (reciprocal_condition(vectors) < 1e-10)
            throw NotDiagonalizable("residue at pole " + std::to_string(i) +
                                    " has no eigenvector basis");
        const Matrix duals = vectors.inverse();
        const auto clusters = detail::cluster_values(solver.eigenvalues(), cluster_tol);
        const int zero = detail::zero_cluster(clusters, cluster_tol);
        std::vector<int> slots;
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            if (static_cast<int>(c) == zero) continue;
            for (int k : clusters[c].members) slots.push_back(k);
        }
        std::sort(slots.begin(), slots.end(), [&](int a_idx, int b_idx) {
            const Complex va = solver.eigenvalues()[a_idx];
            const Complex vb = solver.eigenvalues()[b_idx];
            if (va == vb) return a_idx < b_idx;
            return detail::spectral_before(va, vb);
        });
        const int r = static_cast<int>(slots.size());
        pf.basis = Matrix(m, r);
        pf.dual = Matrix(r, m);
        pf.exponents = Vector(r);
        for (int j = 0; j < r; ++j) {
            const int k = slots[j];
            const Vector column = vectors.col(k);
            const Vector normalized = gauge_normalize(column);
            const Complex scale = column[largest_component(column)];
            pf.basis.col(j) = normalized;
            pf.dual.row(j) = solver.eigenvalues()[k] * scale * duals.row(k);
            pf.exponents[j] = solver.eigenvalues()[k];
        }
        const double tol = 1e-9 * std::max(1.0, max_abs(a));
        if (max_abs(pf.residue() - a) > tol)
            throw RankMismatch("spectral clustering at pole " + std::to_string(i) +
                               " is inconsistent with the residue rank");
        factors.push_back(std::move(pf));
    }
    return DecompositionPoint(std::move(factors), system.residue_at_infinity());
}

inline FuchsianSystem recompose(const DecompositionPoint& point, double tol = 1e-9) {
    const int m = point.matrix_size();
    std::vector<Complex> poles;
    std::vector<Matrix> residues;
    Matrix total = Matrix::Zero(m, m);
    for (int i = 0; i < point.pole_count(); ++i) {
        poles.push_back(point.pole(i).location);
        residues.push_back(point.pole(i).residue());
        total += residues.back();
    }
    const Matrix derived = -total;
    if (max_abs(derived - point.infinity_target()) >
        tol * (1.0 + max_abs(point.infinity_target())))
        throw InfinityMismatch("factors do not reproduce the infinity residue");
    return build_system(std::move(poles), std::move(residues));
}

inline int accessory_dimension(const std::vector<std::vector<int>>& spectral_type,
                               int finite_pole_count, int matrix_size) {
    if (matrix_size < 1 || finite_pole_count < 1)
        throw InvalidPartition("need a positive matrix size and pole count");
    if (static_cast<int>(spectral_type.size()) != finite_pole_count + 1)
        throw InvalidPartition("expected one partition per finite pole plus infinity");
    int square_sum = 0;
    for (const auto& partition : spectral_type) {
        if (partition.empty()) throw InvalidPartition("empty partition");
        int sum = 0;
        for (int part : partition) {
            if (part <= 0) throw InvalidPartition("partition parts must be positive");
            sum += part;
            square_sum += part * part;
        }
        if (sum != matrix_size)
            throw InvalidPartition("partition does not sum to the matrix size");
    }
    return (finite_pole_count - 1) * matrix_size * matrix_size - square_sum + 2;
}

inline Complex continuous_hamiltonian(const FuchsianSystem& system, int j) {
    if (j < 0 || j >= system.pole_count())
        throw InvalidIndex("pole index out of range");
    if (system.pole_count() < 2)
        throw SinglePole("the Hamiltonian needs at least two poles");
    Complex value = 0;
    for (int i = 0; i < system.pole_count(); ++i) {
        if (i == j) continue;
        value += (system.residue(j) * system.residue(i)).trace() /
                 (system.pole(j) - system.pole(i));
    }
    return value;
}

inline Complex continuous_hamiltonian(const DecompositionPoint& point, int j) {
    if (j < 0 || j >= point.pole_count())
        throw InvalidIndex("pole index out of range");
    if (point.pole_count() < 2)
        throw SinglePole("the Hamiltonian needs at least two poles");
    const PoleFactors& pj = point.pole(j);
    Complex value = 0;
    for (int i = 0; i < point.pole_count(); ++i) {
        if (i == j) continue;
        const PoleFactors& pi = point.pole(i);
        // tr(A_j A_i) through the factors: tr((C_i B_j)(C_j B_i)).
        const Matrix left = pi.dual * pj.basis;
        const Matrix right = pj.dual * pi.basis;
        value += (left * right).trace() / (pj.location - pi.location);
    }
    return value;
}

}  // namespace schlesinger
