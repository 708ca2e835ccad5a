#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "schlesinger/errors.hpp"

// Exact integer intersection theory on the rational surfaces underlying the two
// reductions: lattice bases, anticanonical decompositions, blow-down tables, and
// push-forward actions with translation-vector extraction on the root bases.

namespace schlesinger {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

namespace detail {

inline long long checked_add(long long a, long long b) {
    long long out = 0;
    if (__builtin_add_overflow(a, b, &out))
        throw IntegerOverflow("integer overflow in lattice arithmetic");
    return out;
}

inline long long checked_mul(long long a, long long b) {
    long long out = 0;
    if (__builtin_mul_overflow(a, b, &out))
        throw IntegerOverflow("integer overflow in lattice arithmetic");
    return out;
}

}  // namespace detail

// Ordered generators of a surface lattice together with their intersection matrix.
class LatticeBasis {
public:
    LatticeBasis(std::vector<std::string> labels, IntMatrix gram)
        : labels_(std::move(labels)), gram_(std::move(gram)) {
        if (gram_.rows() != gram_.cols())
            throw LatticeStructure("gram matrix must be square");
        if (static_cast<Eigen::Index>(labels_.size()) != gram_.rows())
            throw LatticeStructure("a basis needs one label per generator");
        for (Eigen::Index i = 0; i < gram_.rows(); ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if (gram_(i, j) != gram_(j, i))
                    throw LatticeStructure("gram matrix is not symmetric");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (labels_[i] == labels_[j])
                    throw LatticeStructure("duplicate generator label: " + labels_[i]);
        check_signature();
    }

    int rank() const { return static_cast<int>(labels_.size()); }
    const std::vector<std::string>& labels() const { return labels_; }
    const IntMatrix& gram() const { return gram_; }

    int index_of(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<int>(i);
        throw LatticeStructure("unknown generator: " + label);
    }

    friend bool operator==(const LatticeBasis& a, const LatticeBasis& b) {
        if (a.labels_ != b.labels_) return false;
        for (Eigen::Index i = 0; i < a.gram_.rows(); ++i)
            for (Eigen::Index j = 0; j < a.gram_.cols(); ++j)
                if (a.gram_(i, j) != b.gram_(i, j)) return false;
        return true;
    }

private:
    void check_signature() const {
        if (rank() == 0) throw LatticeStructure("signature needs exactly one positive direction");
        Eigen::MatrixXd real = gram_.cast<double>();
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(real);
        const double tol = 1e-9 * std::max(1.0, real.cwiseAbs().maxCoeff());
        int positive = 0;
        for (Eigen::Index i = 0; i < eigen.eigenvalues().size(); ++i) {
            const double lambda = eigen.eigenvalues()(i);
            if (std::abs(lambda) <= tol) throw LatticeStructure("gram matrix is degenerate");
            if (lambda > 0) ++positive;
        }
        if (positive != 1)
            throw LatticeStructure("signature needs exactly one positive direction, found " +
                                   std::to_string(positive));
    }

    std::vector<std::string> labels_;
    IntMatrix gram_;
};

// An integer divisor class expressed over a fixed basis.
struct LatticeClass {
    LatticeBasis basis;
    IntVector coeffs;
};

namespace detail {

inline void require_same_basis(const LatticeClass& a, const LatticeClass& b) {
    if (!(a.basis == b.basis)) throw BasisMismatch("classes live on different bases");
}

inline void require_shape(const LatticeClass& c) {
    if (c.coeffs.size() != c.basis.rank())
        throw LatticeStructure("coefficient vector length does not match the basis rank");
}

}  // namespace detail

inline LatticeClass generator(const LatticeBasis& basis, const std::string& label) {
    IntVector c = IntVector::Zero(basis.rank());
    c(basis.index_of(label)) = 1;
    return {basis, std::move(c)};
}

inline bool operator==(const LatticeClass& a, const LatticeClass& b) {
    if (!(a.basis == b.basis) || a.coeffs.size() != b.coeffs.size()) return false;
    for (Eigen::Index i = 0; i < a.coeffs.size(); ++i)
        if (a.coeffs(i) != b.coeffs(i)) return false;
    return true;
}

inline LatticeClass operator+(const LatticeClass& a, const LatticeClass& b) {
    detail::require_same_basis(a, b);
    detail::require_shape(a);
    detail::require_shape(b);
    IntVector c(a.coeffs.size());
    for (Eigen::Index i = 0; i < c.size(); ++i)
        c(i) = detail::checked_add(a.coeffs(i), b.coeffs(i));
    return {a.basis, std::move(c)};
}

inline LatticeClass operator*(long long k, const LatticeClass& a) {
    detail::require_shape(a);
    IntVector c(a.coeffs.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = detail::checked_mul(k, a.coeffs(i));
    return {a.basis, std::move(c)};
}

inline LatticeClass operator*(const LatticeClass& a, long long k) { return k * a; }

inline LatticeClass operator-(const LatticeClass& a) { return -1LL * a; }

inline LatticeClass operator-(const LatticeClass& a, const LatticeClass& b) {
    return a + (-b);
}

// Intersection number a.b through the basis gram matrix.
inline long long pair(const LatticeClass& a, const LatticeClass& b) {
    detail::require_same_basis(a, b);
    detail::require_shape(a);
    detail::require_shape(b);
    const IntMatrix& g = a.basis.gram();
    long long acc = 0;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        if (a.coeffs(i) == 0) continue;
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (g(i, j) == 0 || b.coeffs(j) == 0) continue;
            const long long term = detail::checked_mul(detail::checked_mul(a.coeffs(i), g(i, j)),
                                                       b.coeffs(j));
            acc = detail::checked_add(acc, term);
        }
    }
    return acc;
}

// Checks that the weighted components are -2 classes summing to the anticanonical class.
inline bool verify_anticanonical_decomposition(
    const LatticeClass& minus_k,
    const std::vector<std::pair<LatticeClass, long long>>& components,
    std::string* diagnostics = nullptr) {
    const auto fail = [&](std::string msg) {
        if (diagnostics) *diagnostics = std::move(msg);
        return false;
    };
    for (std::size_t i = 0; i < components.size(); ++i)
        if (!(components[i].first.basis == minus_k.basis))
            return fail("component " + std::to_string(i) + " lives on a different basis");
    for (std::size_t i = 0; i < components.size(); ++i) {
        const long long square = pair(components[i].first, components[i].first);
        if (square != -2)
            return fail("component " + std::to_string(i) + " has self-intersection " +
                        std::to_string(square) + ", expected -2");
    }
    IntVector sum = IntVector::Zero(minus_k.basis.rank());
    for (const auto& [cls, mult] : components)
        for (Eigen::Index j = 0; j < sum.size(); ++j)
            sum(j) = detail::checked_add(sum(j), detail::checked_mul(mult, cls.coeffs(j)));
    for (Eigen::Index j = 0; j < sum.size(); ++j)
        if (sum(j) != minus_k.coeffs(j))
            return fail("the weighted component sum misses the anticanonical class at generator " +
                        minus_k.basis.labels()[static_cast<std::size_t>(j)]);
    return true;
}

// Checks the intersection table of a candidate ruled-surface basis inside the ambient
// lattice, then the genus condition 2g - 2 = C.C + C.K with g = 0 for every class.
inline bool verify_blowdown_structure(const LatticeClass& minus_k, const LatticeClass& hf,
                                      const LatticeClass& hg,
                                      const std::vector<LatticeClass>& exceptional,
                                      std::string* diagnostics = nullptr) {
    const auto fail = [&](std::string msg) {
        if (diagnostics) *diagnostics = std::move(msg);
        return false;
    };
    std::vector<std::pair<std::string, const LatticeClass*>> named;
    named.emplace_back("Hf", &hf);
    named.emplace_back("Hg", &hg);
    for (std::size_t i = 0; i < exceptional.size(); ++i)
        named.emplace_back("E" + std::to_string(i + 1), &exceptional[i]);

    for (const auto& [name, cls] : named)
        if (!(cls->basis == minus_k.basis))
            return fail(name + " lives on a different basis");

    for (std::size_t i = 0; i < named.size(); ++i) {
        const long long want = i < 2 ? 0 : -1;
        const long long got = pair(*named[i].second, *named[i].second);
        if (got != want)
            return fail(named[i].first + " has self-intersection " + std::to_string(got) +
                        ", expected " + std::to_string(want));
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        for (std::size_t j = i + 1; j < named.size(); ++j) {
            const long long want = (i == 0 && j == 1) ? 1 : 0;
            const long long got = pair(*named[i].second, *named[j].second);
            if (got != want)
                return fail(named[i].first + " and " + named[j].first + " pair to " +
                            std::to_string(got) + ", expected " + std::to_string(want));
        }
    }
    for (const auto& [name, cls] : named) {
        const long long want = pair(*cls, *cls) + 2;
        const long long got = pair(*cls, minus_k);
        if (got != want)
            return fail(name + " fails the genus condition: pairs with the anticanonical class to " +
                        std::to_string(got) + ", expected " + std::to_string(want));
    }
    return true;
}

// Push-forward on divisor classes; columns of the matrix are the generator images.
class LatticeAction {
public:
    LatticeAction(LatticeBasis basis, IntMatrix matrix)
        : basis_(std::move(basis)), matrix_(std::move(matrix)) {
        if (matrix_.rows() != basis_.rank() || matrix_.cols() != basis_.rank())
            throw LatticeStructure("action matrix shape does not match the basis rank");
        const IntMatrix& g = basis_.gram();
        for (Eigen::Index i = 0; i < matrix_.cols(); ++i) {
            for (Eigen::Index j = i; j < matrix_.cols(); ++j) {
                long long acc = 0;
                for (Eigen::Index r = 0; r < g.rows(); ++r) {
                    if (matrix_(r, i) == 0) continue;
                    for (Eigen::Index c = 0; c < g.cols(); ++c) {
                        if (g(r, c) == 0 || matrix_(c, j) == 0) continue;
                        acc = detail::checked_add(
                            acc, detail::checked_mul(detail::checked_mul(matrix_(r, i), g(r, c)),
                                                     matrix_(c, j)));
                    }
                }
                if (acc != g(i, j))
                    throw NotIsometry("images of generators " + std::to_string(i) + " and " +
                                      std::to_string(j) + " pair to " + std::to_string(acc) +
                                      " where the generators pair to " + std::to_string(g(i, j)));
            }
        }
    }

    const LatticeBasis& basis() const { return basis_; }
    const IntMatrix& matrix() const { return matrix_; }

    LatticeClass apply(const LatticeClass& cls) const {
        if (!(cls.basis == basis_)) throw BasisMismatch("classes live on different bases");
        detail::require_shape(cls);
        IntVector out = IntVector::Zero(basis_.rank());
        for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
            if (cls.coeffs(j) == 0) continue;
            for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
                out(i) = detail::checked_add(out(i),
                                             detail::checked_mul(matrix_(i, j), cls.coeffs(j)));
        }
        return {basis_, std::move(out)};
    }

private:
    LatticeBasis basis_;
    IntMatrix matrix_;
};

inline LatticeAction build_action(const LatticeBasis& basis,
                                  const std::vector<LatticeClass>& images) {
    if (static_cast<int>(images.size()) != basis.rank())
        throw LatticeStructure("an action needs one image per generator");
    IntMatrix m(basis.rank(), basis.rank());
    for (std::size_t j = 0; j < images.size(); ++j) {
        if (!(images[j].basis == basis)) throw BasisMismatch("classes live on different bases");
        detail::require_shape(images[j]);
        for (int i = 0; i < basis.rank(); ++i) m(i, static_cast<Eigen::Index>(j)) = images[j].coeffs(i);
    }
    return LatticeAction(basis, std::move(m));
}

namespace detail {

// Writes image = base + k * delta exactly, if such an integer k exists.
inline bool delta_shift(const IntVector& image, const IntVector& base, const IntVector& delta,
                        long long* shift) {
    long long k = 0;
    bool pinned = false;
    for (Eigen::Index i = 0; i < image.size(); ++i) {
        const long long diff = checked_add(image(i), checked_mul(-1, base(i)));
        if (delta(i) == 0) {
            if (diff != 0) return false;
            continue;
        }
        if (diff % delta(i) != 0) return false;
        const long long candidate = diff / delta(i);
        if (pinned && candidate != k) return false;
        k = candidate;
        pinned = true;
    }
    *shift = k;
    return true;
}

}  // namespace detail

// Shift coefficients (k_i) with action(root_i) = root_i + k_i * delta, verified exactly.
inline IntVector translation_vector(const LatticeAction& action,
                                    const std::vector<LatticeClass>& roots,
                                    const LatticeClass& delta) {
    if (!(delta.basis == action.basis())) throw BasisMismatch("classes live on different bases");
    for (const auto& root : roots)
        if (!(root.basis == action.basis())) throw BasisMismatch("classes live on different bases");
    if (!(action.apply(delta) == delta))
        throw DeltaNotFixed("the action does not fix the given delta class");

    IntVector shifts(static_cast<Eigen::Index>(roots.size()));
    std::string trouble;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const LatticeClass image = action.apply(roots[i]);
        long long k = 0;
        if (detail::delta_shift(image.coeffs, roots[i].coeffs, delta.coeffs, &k)) {
            shifts(static_cast<Eigen::Index>(i)) = k;
            continue;
        }
        // Report where the image landed instead: a permuted root is the usual culprit.
        std::string note = "root " + std::to_string(i) + " image is not a delta shift of any listed root";
        for (std::size_t j = 0; j < roots.size(); ++j) {
            long long s = 0;
            if (j != i && detail::delta_shift(image.coeffs, roots[j].coeffs, delta.coeffs, &s)) {
                note = "root " + std::to_string(i) + " maps onto root " + std::to_string(j) +
                       " (shift " + std::to_string(s) + ")";
                break;
            }
        }
        if (!trouble.empty()) trouble += "; ";
        trouble += note;
    }
    if (!trouble.empty())
        throw NotTranslation("the action is not a translation on the given roots: " + trouble);
    return shifts;
}

// Entries 2(a_i.a_j)/(a_j.a_j), the affine Cartan matrix for -2 root bases.
inline IntMatrix cartan_matrix(const std::vector<LatticeClass>& roots) {
    for (std::size_t i = 1; i < roots.size(); ++i)
        if (!(roots[i].basis == roots[0].basis))
            throw BasisMismatch("classes live on different bases");
    const Eigen::Index n = static_cast<Eigen::Index>(roots.size());
    std::vector<long long> norms(roots.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        norms[i] = pair(roots[i], roots[i]);
        if (norms[i] == 0)
            throw LatticeStructure("root " + std::to_string(i) + " has vanishing self-intersection");
    }
    IntMatrix c(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const long long twice = detail::checked_mul(
                2, pair(roots[static_cast<std::size_t>(i)], roots[static_cast<std::size_t>(j)]));
            const long long norm = norms[static_cast<std::size_t>(j)];
            if (twice % norm != 0)
                throw LatticeStructure("Cartan entry is not integral at roots " + std::to_string(i) +
                                       ", " + std::to_string(j));
            c(i, j) = twice / norm;
        }
    }
    return c;
}

// A surface shipped as integer data: basis, anticanonical class with its -2 component
// decomposition, and the symmetry root basis (empty where the source gives none).
struct SurfaceData {
    LatticeBasis basis;
    LatticeClass minus_k;
    std::vector<LatticeClass> components;
    std::vector<long long> multiplicities;
    std::vector<LatticeClass> roots;
};

// Candidate ruled-surface classes inside an ambient lattice.
struct BlowdownTable {
    LatticeClass hf;
    LatticeClass hg;
    std::vector<LatticeClass> exceptional;
};

namespace detail {

inline IntMatrix ruled_gram(int exceptional_count) {
    const int n = 2 + exceptional_count;
    IntMatrix g = IntMatrix::Zero(n, n);
    g(0, 1) = g(1, 0) = 1;
    for (int i = 2; i < n; ++i) g(i, i) = -1;
    return g;
}

inline IntMatrix plane_gram(int exceptional_count) {
    const int n = 1 + exceptional_count;
    IntMatrix g = IntMatrix::Zero(n, n);
    g(0, 0) = 1;
    for (int i = 1; i < n; ++i) g(i, i) = -1;
    return g;
}

inline LatticeBasis blown_quadric_basis() {
    return LatticeBasis({"H_f", "H_g", "E_1", "E_2", "E_3", "E_4", "E_5", "E_6", "E_7", "E_8"},
                        ruled_gram(8));
}

inline LatticeBasis blown_plane_basis() {
    return LatticeBasis({"E", "E_1", "E_2", "E_3", "E_4", "E_5", "E_6", "E_7", "E_8", "E_9"},
                        plane_gram(9));
}

inline LatticeBasis resolved_dpv_basis() {
    return LatticeBasis(
        {"H_p", "H_q", "F_1", "F_2", "F_2'", "F_3", "F_4", "F_4'", "F_5", "F_6", "F_7", "F_8"},
        ruled_gram(10));
}

inline LatticeClass span(const LatticeBasis& basis,
                         std::initializer_list<std::pair<const char*, long long>> terms) {
    IntVector c = IntVector::Zero(basis.rank());
    for (const auto& [label, weight] : terms) c(basis.index_of(label)) += weight;
    return {basis, std::move(c)};
}

inline LatticeClass quadric_minus_k(const LatticeBasis& basis) {
    return span(basis, {{"H_f", 2}, {"H_g", 2}, {"E_1", -1}, {"E_2", -1}, {"E_3", -1},
                        {"E_4", -1}, {"E_5", -1}, {"E_6", -1}, {"E_7", -1}, {"E_8", -1}});
}

inline LatticeAction action_from_rows(const LatticeBasis& basis, const long long (*rows)[10]) {
    IntMatrix m(10, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) m(j, i) = rows[i][j];
    return LatticeAction(basis, std::move(m));
}

}  // namespace detail

// Eight-point blow-up of the quadric carrying the first reduction's standard dynamic.
inline SurfaceData dpv_standard_surface() {
    const LatticeBasis b = detail::blown_quadric_basis();
    return {b,
            detail::quadric_minus_k(b),
            {detail::span(b, {{"H_g", 1}, {"E_1", -1}, {"E_2", -1}}),
             detail::span(b, {{"H_g", 1}, {"E_3", -1}, {"E_4", -1}}),
             detail::span(b, {{"H_f", 1}, {"E_5", -1}, {"E_6", -1}}),
             detail::span(b, {{"E_5", 1}, {"E_7", -1}}),
             detail::span(b, {{"E_6", 1}, {"E_8", -1}})},
            {1, 1, 2, 1, 1},
            {detail::span(b, {{"E_1", 1}, {"E_2", -1}}),
             detail::span(b, {{"E_3", 1}, {"E_4", -1}}),
             detail::span(b, {{"H_f", 1}, {"E_1", -1}, {"E_3", -1}}),
             detail::span(b, {{"H_g", 1}, {"E_5", -1}, {"E_7", -1}}),
             detail::span(b, {{"H_g", 1}, {"E_6", -1}, {"E_8", -1}})}};
}

inline LatticeAction dpv_standard_step_action() {
    static constexpr long long rows[10][10] = {
        {5, 2, -2, -2, -2, -2, -1, -1, -1, -1},
        {2, 1, -1, -1, -1, -1, 0, 0, 0, 0},
        {1, 0, 0, -1, 0, 0, 0, 0, 0, 0},
        {1, 0, -1, 0, 0, 0, 0, 0, 0, 0},
        {1, 0, 0, 0, 0, -1, 0, 0, 0, 0},
        {1, 0, 0, 0, -1, 0, 0, 0, 0, 0},
        {2, 1, -1, -1, -1, -1, 0, 0, 0, -1},
        {2, 1, -1, -1, -1, -1, 0, 0, -1, 0},
        {2, 1, -1, -1, -1, -1, 0, -1, 0, 0},
        {2, 1, -1, -1, -1, -1, -1, 0, 0, 0},
    };
    return detail::action_from_rows(detail::blown_quadric_basis(), rows);
}

// Twelve-generator lattice of the resolved elementary-step map for the first reduction;
// the surface is not relatively minimal, so no root data ships with it.
inline SurfaceData dpv_schlesinger_surface() {
    const LatticeBasis b = detail::resolved_dpv_basis();
    return {b,
            detail::span(b, {{"H_p", 2}, {"H_q", 2}, {"F_1", -1}, {"F_2", -1}, {"F_2'", -1},
                             {"F_3", -1}, {"F_4", -1}, {"F_4'", -1}, {"F_5", -1}, {"F_6", -1},
                             {"F_7", -1}, {"F_8", -1}}),
            {},
            {},
            {}};
}

inline BlowdownTable dpv_blowdown_table() {
    const LatticeBasis b = detail::resolved_dpv_basis();
    return {detail::span(b, {{"H_p", 1}, {"H_q", 1}, {"F_1", -1}, {"F_3", -1}}),
            detail::span(b, {{"H_p", 1}, {"H_q", 1}, {"F_3", -1}, {"F_4'", -1}}),
            {detail::span(b, {{"H_p", 1}, {"H_q", 1}, {"F_1", -1}, {"F_3", -1}, {"F_4'", -1}}),
             generator(b, "F_2"),
             detail::span(b, {{"H_p", 1}, {"F_3", -1}}),
             generator(b, "F_4"),
             generator(b, "F_5"),
             generator(b, "F_6"),
             generator(b, "F_7"),
             generator(b, "F_8"),
             generator(b, "F_2'"),
             detail::span(b, {{"H_q", 1}, {"F_3", -1}})}};
}

// The two -1 pairs the resolved step exchanges; blowing either pair down restores
// a minimal model, so the classes are reported rather than contracted.
inline std::vector<std::pair<LatticeClass, LatticeClass>> dpv_exchanged_pairs() {
    const LatticeBasis b = detail::resolved_dpv_basis();
    return {{generator(b, "F_2"), generator(b, "F_4'")},
            {generator(b, "F_2'"), detail::span(b, {{"H_q", 1}, {"F_3", -1}})}};
}

// Eight-point blow-up of the quadric carrying the second reduction's standard dynamic.
inline SurfaceData a2star_standard_surface() {
    const LatticeBasis b = detail::blown_quadric_basis();
    return {b,
            detail::quadric_minus_k(b),
            {detail::span(b, {{"H_f", 1}, {"H_g", 1}, {"E_1", -1}, {"E_2", -1}, {"E_3", -1},
                              {"E_4", -1}}),
             detail::span(b, {{"H_f", 1}, {"E_5", -1}, {"E_6", -1}}),
             detail::span(b, {{"H_g", 1}, {"E_7", -1}, {"E_8", -1}})},
            {1, 1, 1},
            {detail::span(b, {{"E_3", 1}, {"E_4", -1}}),
             detail::span(b, {{"E_2", 1}, {"E_3", -1}}),
             detail::span(b, {{"E_1", 1}, {"E_2", -1}}),
             detail::span(b, {{"H_f", 1}, {"E_1", -1}, {"E_7", -1}}),
             detail::span(b, {{"E_7", 1}, {"E_8", -1}}),
             detail::span(b, {{"H_g", 1}, {"E_1", -1}, {"E_5", -1}}),
             detail::span(b, {{"E_5", 1}, {"E_6", -1}})}};
}

inline LatticeAction a2star_standard_step_action() {
    static constexpr long long rows[10][10] = {
        {6, 3, -2, -2, -2, -2, -1, -1, -3, -3},
        {3, 1, -1, -1, -1, -1, 0, 0, -1, -1},
        {2, 1, 0, -1, -1, -1, 0, 0, -1, -1},
        {2, 1, -1, 0, -1, -1, 0, 0, -1, -1},
        {2, 1, -1, -1, 0, -1, 0, 0, -1, -1},
        {2, 1, -1, -1, -1, 0, 0, 0, -1, -1},
        {3, 1, -1, -1, -1, -1, 0, -1, -1, -1},
        {3, 1, -1, -1, -1, -1, -1, 0, -1, -1},
        {1, 0, 0, 0, 0, 0, 0, 0, 0, -1},
        {1, 0, 0, 0, 0, 0, 0, 0, -1, 0},
    };
    return detail::action_from_rows(detail::blown_quadric_basis(), rows);
}

// The elementary-step push-forward written on the blow-down classes, which satisfy the
// same intersection table as the standard generators.
inline LatticeAction a2star_schlesinger_step_action() {
    static constexpr long long rows[10][10] = {
        {2, 3, -1, -1, -1, -1, -2, 0, 0, -2},
        {3, 5, -2, -2, -2, -2, -3, -1, 0, -2},
        {1, 2, 0, -1, -1, -1, -1, 0, 0, -1},
        {1, 2, -1, 0, -1, -1, -1, 0, 0, -1},
        {1, 2, -1, -1, 0, -1, -1, 0, 0, -1},
        {1, 2, -1, -1, -1, 0, -1, 0, 0, -1},
        {0, 0, 0, 0, 0, 0, 0, 0, 1, 0},
        {2, 2, -1, -1, -1, -1, -2, 0, 0, -1},
        {2, 3, -1, -1, -1, -1, -2, -1, 0, -2},
        {0, 1, 0, 0, 0, 0, -1, 0, 0, 0},
    };
    return detail::action_from_rows(detail::blown_quadric_basis(), rows);
}

// Nine-point blow-up of the plane on which the second reduction's elementary step acts.
inline SurfaceData a2star_schlesinger_surface() {
    const LatticeBasis b = detail::blown_plane_basis();
    return {b,
            detail::span(b, {{"E", 3}, {"E_1", -1}, {"E_2", -1}, {"E_3", -1}, {"E_4", -1},
                             {"E_5", -1}, {"E_6", -1}, {"E_7", -1}, {"E_8", -1}, {"E_9", -1}}),
            {detail::span(b, {{"E", 2}, {"E_1", -1}, {"E_2", -1}, {"E_3", -1}, {"E_4", -1},
                              {"E_5", -1}, {"E_6", -1}}),
             detail::span(b, {{"E", 1}, {"E_1", -1}, {"E_7", -1}, {"E_8", -1}}),
             detail::span(b, {{"E_1", 1}, {"E_9", -1}})},
            {1, 1, 1},
            {}};
}

inline BlowdownTable a2star_blowdown_table() {
    const LatticeBasis b = detail::blown_plane_basis();
    return {detail::span(b, {{"E", 1}, {"E_1", -1}}),
            detail::span(b, {{"E", 1}, {"E_2", -1}}),
            {generator(b, "E_3"),
             generator(b, "E_4"),
             generator(b, "E_5"),
             generator(b, "E_6"),
             generator(b, "E_7"),
             generator(b, "E_8"),
             detail::span(b, {{"E", 1}, {"E_1", -1}, {"E_2", -1}}),
             generator(b, "E_9")}};
}

}  // namespace schlesinger
