#pragma once

// H-representation polyhedra {θ : Aθ ≤ b} and the calculus used to build
// terminal and feasible sets: support LPs, intersection, affine preimage,
// Fourier–Motzkin projection, redundancy removal, containment and slicing.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "feasgov/error.hpp"
#include "feasgov/lp.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/qp.hpp"

namespace feasgov {

class Polyhedron {
public:
    Polyhedron() = default;

    /// Rows are scaled to unit norm. A zero row is dropped when 0 ≤ b holds
    /// and otherwise turns the set into the canonical empty set.
    Polyhedron(const Matrix& A, const Vector& b) {
        if (A.rows() != b.size()) {
            throw Error("dimension_mismatch", "Polyhedron rows vs offsets");
        }
        if (!A.allFinite() || !b.allFinite()) {
            throw Error("non_finite", "Polyhedron");
        }
        dim_ = A.cols();
        std::vector<Eigen::Index> keep;
        bool infeasible_row = false;
        Vector norms(A.rows());
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            norms(i) = A.row(i).norm();
            if (norms(i) <= kZeroRow) {
                if (b(i) < -tolerances().feas) {
                    infeasible_row = true;
                }
                continue;
            }
            keep.push_back(i);
        }
        if (infeasible_row) {
            *this = empty(dim_);
            return;
        }
        A_.resize(static_cast<Eigen::Index>(keep.size()), dim_);
        b_.resize(static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const auto i = keep[k];
            A_.row(static_cast<Eigen::Index>(k)) = A.row(i) / norms(i);
            b_(static_cast<Eigen::Index>(k)) = b(i) / norms(i);
        }
    }

    static Polyhedron universe(Eigen::Index dim) {
        Polyhedron p;
        p.dim_ = dim;
        p.A_.resize(0, dim);
        p.b_.resize(0);
        return p;
    }

    /// {x1 ≤ −1, −x1 ≤ −1}: the canonical empty set.
    static Polyhedron empty(Eigen::Index dim) {
        Polyhedron p;
        p.dim_ = dim;
        p.A_ = Matrix::Zero(2, dim);
        p.b_ = Vector::Constant(2, -1.0);
        if (dim > 0) {
            p.A_(0, 0) = 1.0;
            p.A_(1, 0) = -1.0;
        }
        return p;
    }

    /// Takes rows verbatim; the caller guarantees unit-norm rows.
    static Polyhedron from_normalized(Matrix A, Vector b) {
        Polyhedron p;
        p.dim_ = A.cols();
        p.A_ = std::move(A);
        p.b_ = std::move(b);
        return p;
    }

    static Polyhedron box(const Vector& lo, const Vector& hi) {
        const auto n = lo.size();
        Matrix A(2 * n, n);
        A << Matrix::Identity(n, n), -Matrix::Identity(n, n);
        Vector b(2 * n);
        b << hi, -lo;
        return Polyhedron(A, b);
    }

    [[nodiscard]] const Matrix& A() const { return A_; }
    [[nodiscard]] const Vector& b() const { return b_; }
    [[nodiscard]] Eigen::Index dim() const { return dim_; }
    [[nodiscard]] Eigen::Index rows() const { return A_.rows(); }

    [[nodiscard]] bool contains_point(const Vector& x, double tol = tolerances().feas) const {
        if (rows() == 0) {
            return true;
        }
        return (A_ * x - b_).maxCoeff() <= tol;
    }

    /// Smallest row slack b − Ax (negative when x violates a row).
    [[nodiscard]] double min_slack(const Vector& x) const {
        if (rows() == 0) {
            return std::numeric_limits<double>::infinity();
        }
        return (b_ - A_ * x).minCoeff();
    }

    static constexpr double kZeroRow = 1e-12;

private:
    Matrix A_;
    Vector b_;
    Eigen::Index dim_ = 0;
};

enum class LpStatus { optimal, empty, unbounded };

struct LpResult {
    LpStatus status = LpStatus::empty;
    double value = 0.0;
    Vector argmax;
};

namespace detail {

inline Polyhedron from_rows(const Matrix& A, const Vector& b, Eigen::Index dim) {
    if (A.rows() == 0) {
        return Polyhedron::universe(dim);
    }
    return Polyhedron(A, b);
}

// Proximal-point iteration of the QP solver:
//   θ⁺ = argmin ½ρ‖θ − θₖ‖² − cᵀθ  s.t. Aθ ≤ b,
// which reaches an LP maximizer after finitely many steps.
inline LpResult support_raw(const Vector& c, const Matrix& A, const Vector& b, const Vector* start = nullptr) {
    const auto n = c.size();
    LpResult res;
    const double cn = c.norm();
    if (A.rows() == 0) {
        if (cn == 0.0) {
            res.status = LpStatus::optimal;
            res.argmax = Vector::Zero(n);
            return res;
        }
        res.status = LpStatus::unbounded;
        return res;
    }
    const Vector cu = cn > 0.0 ? Vector(c / cn) : Vector(Vector::Zero(n));
    constexpr double kFirstRho = 1e-7;
    constexpr double kRho = 1e-4;
    constexpr double kUnbounded = 1e6;

    QpProblem qp;
    qp.A = A;
    qp.b = b;
    Vector theta = start != nullptr ? *start : Vector::Zero(n);
    std::vector<int> active;
    for (int it = 0; it < 60; ++it) {
        const double rho = it == 0 ? kFirstRho : kRho;
        qp.H = Matrix::Identity(n, n) * rho;
        qp.f = -cu - rho * theta;
        const QpSolution sol = solve_qp(qp, active.empty() ? nullptr : &active);
        if (sol.status == QpStatus::infeasible) {
            res.status = LpStatus::empty;
            return res;
        }
        if (!sol.z.allFinite() || sol.z.norm() > kUnbounded) {
            res.status = LpStatus::unbounded;
            return res;
        }
        const double step = (sol.z - theta).norm();
        theta = sol.z;
        active = sol.active_set;
        if (cn == 0.0 || (it > 0 && step <= 1e-10 * (1.0 + theta.norm()))) {
            break;
        }
    }
    res.status = LpStatus::optimal;
    res.argmax = theta;
    res.value = c.dot(theta);
    return res;
}

}  // namespace detail

namespace detail {

// Active-set walk from a (nearly) feasible start, with the proximal iteration
// as a fallback when the walk stalls.
inline LpResult lp_from(const Vector& c, const Matrix& A, const Vector& b, const Vector& start) {
    const LpPoint r = active_set_lp(c, A, b, start);
    LpResult res;
    switch (r.outcome) {
        case LpOutcome::optimal:
            res.status = LpStatus::optimal;
            res.value = r.value;
            res.argmax = r.x;
            return res;
        case LpOutcome::unbounded:
            res.status = LpStatus::unbounded;
            return res;
        case LpOutcome::iteration_limit:
            break;
    }
    return support_raw(c, A, b, &start);
}

inline Chebyshev center_of(const Polyhedron& P) { return chebyshev_center(P.A(), P.b()); }

}  // namespace detail

/// max{cᵀθ : θ ∈ P} from a start point that satisfies the rows up to rounding.
inline LpResult support_from(const Vector& c, const Polyhedron& P, const Vector& start) {
    if (c.size() != P.dim() || start.size() != P.dim()) {
        throw Error("dimension_mismatch", "support direction");
    }
    if (P.rows() == 0) {
        return detail::support_raw(c, P.A(), P.b());
    }
    return detail::lp_from(c, P.A(), P.b(), start);
}

/// max{cᵀθ : θ ∈ P} without throwing.
inline LpResult support(const Vector& c, const Polyhedron& P) {
    if (c.size() != P.dim()) {
        throw Error("dimension_mismatch", "support direction");
    }
    if (P.rows() == 0) {
        return detail::support_raw(c, P.A(), P.b());
    }
    const detail::Chebyshev ch = detail::center_of(P);
    if (ch.radius < -tolerances().feas) {
        return LpResult{};
    }
    return detail::lp_from(c, P.A(), P.b(), ch.center);
}

/// max{cᵀθ : θ ∈ P}; throws "empty_set" / "unbounded".
inline LpResult lp_support(const Vector& c, const Polyhedron& P) {
    LpResult r = support(c, P);
    if (r.status == LpStatus::empty) {
        throw Error("empty_set", "lp_support on an empty polyhedron");
    }
    if (r.status == LpStatus::unbounded) {
        throw Error("unbounded", "lp_support direction unbounded");
    }
    return r;
}

/// Empty when every point violates some row by more than the feasibility tolerance.
inline bool is_empty(const Polyhedron& P) {
    if (P.rows() == 0) {
        return false;
    }
    return detail::center_of(P).radius < -tolerances().feas;
}

namespace detail {

// Exact-duplicate (after normalization) rows collapse onto the tightest offset.
inline void dedupe_rows(Matrix& A, Vector& b) {
    const auto m = A.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        for (Eigen::Index k = 0; k < A.cols(); ++k) {
            if (A(i, k) != A(j, k)) {
                return A(i, k) < A(j, k);
            }
        }
        return i < j;
    });
    std::vector<char> drop(static_cast<std::size_t>(m), 0);
    for (std::size_t s = 0; s < order.size();) {
        std::size_t e = s + 1;
        while (e < order.size() &&
               (A.row(order[e]) - A.row(order[s])).cwiseAbs().maxCoeff() <= 1e-12) {
            ++e;
        }
        // keep lowest original index, with the minimum offset of the group
        Eigen::Index keep = order[s];
        double bmin = b(order[s]);
        for (std::size_t t = s; t < e; ++t) {
            keep = std::min(keep, order[t]);
            bmin = std::min(bmin, b(order[t]));
        }
        for (std::size_t t = s; t < e; ++t) {
            if (order[t] != keep) {
                drop[static_cast<std::size_t>(order[t])] = 1;
            }
        }
        b(keep) = bmin;
        s = e;
    }
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!drop[static_cast<std::size_t>(i)]) {
            A.row(w) = A.row(i);
            b(w) = b(i);
            ++w;
        }
    }
    A.conservativeResize(w, A.cols());
    b.conservativeResize(w);
}

}  // namespace detail

namespace detail {

// Sequential test of each row against the rows still kept. Used for sets
// without interior, where ray shooting has no interior point to start from.
inline Polyhedron remove_redundant_sequential(Matrix A, Vector b, Eigen::Index n) {
    const auto feas = feasibility_phase1(A, b);
    if (!feas.feasible) {
        throw Error("empty_set", "remove_redundant on an empty polyhedron");
    }
    const double tol = tolerances().redundancy;
    auto m = A.rows();

    // Bounding-box certificate: a row dominated over the box hull of P is redundant.
    Vector lo = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(n, std::numeric_limits<double>::infinity());
    if (m > 2 * n) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Vector e = Vector::Zero(n);
            e(j) = 1.0;
            const auto up = support_raw(e, A, b, &feas.witness);
            if (up.status == LpStatus::optimal) {
                hi(j) = up.value;
            }
            const auto dn = support_raw(-e, A, b, &feas.witness);
            if (dn.status == LpStatus::optimal) {
                lo(j) = -dn.value;
            }
        }
    }
    std::vector<char> keep(static_cast<std::size_t>(m), 1);
    if (lo.allFinite() && hi.allFinite()) {
        for (Eigen::Index i = 0; i < m; ++i) {
            double bound = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                bound += std::max(A(i, j) * lo(j), A(i, j) * hi(j));
            }
            if (bound <= b(i) - tol) {
                keep[static_cast<std::size_t>(i)] = 0;
            }
        }
    }

    // Rows that are tight at a box extreme point are reached first by the LP.
    Vector start = feas.witness;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!keep[static_cast<std::size_t>(i)]) {
            continue;
        }
        // Assemble all other kept rows plus a cap on row i.
        Eigen::Index cnt = 0;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (keep[static_cast<std::size_t>(k)] && k != i) {
                ++cnt;
            }
        }
        Matrix Ai(cnt + 1, n);
        Vector bi(cnt + 1);
        Eigen::Index w = 0;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (keep[static_cast<std::size_t>(k)] && k != i) {
                Ai.row(w) = A.row(k);
                bi(w) = b(k);
                ++w;
            }
        }
        Ai.row(w) = A.row(i);
        bi(w) = b(i) + 1.0;
        const auto r = support_raw(A.row(i).transpose(), Ai, bi, &start);
        if (r.status == LpStatus::optimal && r.value <= b(i) + tol) {
            keep[static_cast<std::size_t>(i)] = 0;
        }
    }
    Eigen::Index cnt = std::count(keep.begin(), keep.end(), 1);
    Matrix Ak(cnt, n);
    Vector bk(cnt);
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (keep[static_cast<std::size_t>(i)]) {
            Ak.row(w) = A.row(i);
            bk(w) = b(i);
            ++w;
        }
    }
    return from_rows(Ak, bk, n);
}


// Rows that define facets of a full-dimensional {Ax ≤ b} (unit rows, no
// duplicates) with interior point z0. Lineality directions are quotiented out
// before ray shooting. Rows are visited by increasing slack at z0.
inline std::vector<char> facet_rows(const Matrix& A, const Vector& b, const Vector& z0) {
    const auto m = A.rows();
    const Matrix U = row_space_basis(A);
    const Matrix Ar = A * U;
    const Vector zr = U.transpose() * z0;
    const Vector slack = b - A * z0;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return slack(i) < slack(j); });
    return clarkson_facets(Ar, b, zr, order, tolerances().redundancy);
}

inline constexpr double kInteriorRadius = 1e-7;

}  // namespace detail

/// Drops every row implied by the others; duplicate rows collapse to one and
/// the surviving rows keep their relative order.
inline Polyhedron remove_redundant(const Polyhedron& P) {
    const auto n = P.dim();
    Matrix A = P.A();
    Vector b = P.b();
    if (A.rows() == 0) {
        return P;
    }
    detail::dedupe_rows(A, b);
    const detail::Chebyshev ch = detail::chebyshev_center(A, b);
    if (ch.radius < -tolerances().feas) {
        throw Error("empty_set", "remove_redundant on an empty polyhedron");
    }
    if (ch.radius <= detail::kInteriorRadius) {
        return detail::remove_redundant_sequential(A, b, n);
    }
    const std::vector<char> keep = detail::facet_rows(A, b, ch.center);
    const auto cnt = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), 1));
    Matrix Ak(cnt, n);
    Vector bk(cnt);
    Eigen::Index w = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (keep[static_cast<std::size_t>(i)]) {
            Ak.row(w) = A.row(i);
            bk(w) = b(i);
            ++w;
        }
    }
    return detail::from_rows(Ak, bk, n);
}

inline Polyhedron intersect(const Polyhedron& P, const Polyhedron& Q) {
    if (P.dim() != Q.dim()) {
        throw Error("dimension_mismatch", "intersect");
    }
    Matrix A(P.rows() + Q.rows(), P.dim());
    A << P.A(), Q.A();
    Vector b(P.rows() + Q.rows());
    b << P.b(), Q.b();
    return remove_redundant(detail::from_rows(A, b, P.dim()));
}

/// Row concatenation without pruning.
inline Polyhedron stack(const Polyhedron& P, const Polyhedron& Q) {
    if (P.dim() != Q.dim()) {
        throw Error("dimension_mismatch", "stack");
    }
    Matrix A(P.rows() + Q.rows(), P.dim());
    A << P.A(), Q.A();
    Vector b(P.rows() + Q.rows());
    b << P.b(), Q.b();
    return detail::from_rows(A, b, P.dim());
}

/// M⁻¹P = {x : Mx ∈ P}.
inline Polyhedron affine_preimage(const Matrix& M, const Polyhedron& P) {
    if (M.rows() != P.dim()) {
        throw Error("dimension_mismatch", "affine_preimage");
    }
    return detail::from_rows(P.A() * M, P.b(), M.cols());
}

/// {x : Mx + t ∈ P}.
inline Polyhedron affine_preimage(const Matrix& M, const Vector& t, const Polyhedron& P) {
    if (M.rows() != P.dim() || t.size() != P.dim()) {
        throw Error("dimension_mismatch", "affine_preimage");
    }
    return detail::from_rows(P.A() * M, P.b() - P.A() * t, M.cols());
}

struct ProjectionOptions {
    std::size_t max_rows = 200000;
};

namespace detail {

// For each row p in `rows`, the rows q whose facets meet facet p in a ridge,
// found as the facets of P ∩ {a_pᵀθ = b_p}. An empty optional means the facet
// has no relative interior and adjacency is unknown.
inline std::vector<std::optional<std::vector<char>>> facet_neighbors(const Matrix& A_full, const Vector& b,
                                                                     const std::vector<Eigen::Index>& rows) {
    // Adjacency is unchanged by quotienting out the lineality space.
    const Matrix A = A_full * row_space_basis(A_full);
    const auto m = A.rows();
    const auto n = A.cols();
    std::vector<std::optional<std::vector<char>>> out;
    if (n < 2) {
        out.resize(rows.size());
        return out;
    }
    for (const auto p : rows) {
        // θ = a_p b_p + U ξ with U an orthonormal basis of a_p⊥.
        Eigen::HouseholderQR<Matrix> qr(A.row(p).transpose());
        const Matrix Qf = qr.householderQ();
        const Matrix U = Qf.rightCols(n - 1);
        const Vector base = A.row(p).transpose() * b(p);
        Matrix Ar = A * U;
        Vector br = b - A * base;
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double nr = Ar.row(i).norm();
            if (i == p || nr <= 1e-9) {
                continue;
            }
            Ar.row(i) /= nr;
            br(i) /= nr;
            idx.push_back(i);
        }
        const auto k = static_cast<Eigen::Index>(idx.size());
        Matrix Af(k, n - 1);
        Vector bf(k);
        for (Eigen::Index r = 0; r < k; ++r) {
            Af.row(r) = Ar.row(idx[static_cast<std::size_t>(r)]);
            bf(r) = br(idx[static_cast<std::size_t>(r)]);
        }
        const Chebyshev ch = chebyshev_center(Af, bf);
        if (ch.radius <= kInteriorRadius) {
            out.emplace_back(std::nullopt);
            continue;
        }
        // Rows strictly slack over the bounding box of the facet cannot touch
        // it, so the facet equals (surviving rows) ∩ (box).
        const auto d = n - 1;
        Vector lo(d), hi(d);
        bool bounded = true;
        for (Eigen::Index c = 0; c < d && bounded; ++c) {
            const LpPoint up = active_set_lp(Vector::Unit(d, c), Af, bf, ch.center);
            const LpPoint dn = active_set_lp(-Vector::Unit(d, c), Af, bf, ch.center);
            bounded = up.outcome == LpOutcome::optimal && dn.outcome == LpOutcome::optimal;
            hi(c) = up.value;
            lo(c) = -dn.value;
        }
        std::vector<Eigen::Index> sub;
        if (bounded) {
            const double tol = tolerances().redundancy;
            for (Eigen::Index r = 0; r < k; ++r) {
                double top = 0.0;
                for (Eigen::Index c = 0; c < d; ++c) {
                    top += std::max(Af(r, c) * lo(c), Af(r, c) * hi(c));
                }
                if (top > bf(r) - tol) {
                    sub.push_back(r);
                }
            }
        } else {
            sub.resize(static_cast<std::size_t>(k));
            std::iota(sub.begin(), sub.end(), 0);
        }
        const auto ks = static_cast<Eigen::Index>(sub.size());
        const Eigen::Index nbox = bounded ? 2 * d : 0;
        Matrix As(ks + nbox, d);
        Vector bs(ks + nbox);
        for (Eigen::Index r = 0; r < ks; ++r) {
            As.row(r) = Af.row(sub[static_cast<std::size_t>(r)]);
            bs(r) = bf(sub[static_cast<std::size_t>(r)]);
        }
        if (bounded) {
            // Slightly inflated so that a box row never shadows a true facet.
            const Vector pad = 1e-6 * (hi - lo).cwiseMax(1.0);
            As.middleRows(ks, d) = Matrix::Identity(d, d);
            bs.segment(ks, d) = hi + pad;
            As.bottomRows(d) = -Matrix::Identity(d, d);
            bs.tail(d) = -(lo - pad);
        }
        const std::vector<char> f = facet_rows(As, bs, ch.center);
        std::vector<char> nb(static_cast<std::size_t>(m), 0);
        for (Eigen::Index r = 0; r < ks; ++r) {
            nb[static_cast<std::size_t>(idx[static_cast<std::size_t>(sub[static_cast<std::size_t>(r)])])] =
                f[static_cast<std::size_t>(r)];
        }
        out.emplace_back(std::move(nb));
    }
    return out;
}

// Fourier–Motzkin step on column j. For a full-dimensional input only pairs of
// adjacent facets are combined; other pairs cannot produce facets.
inline Polyhedron eliminate_variable(const Polyhedron& P, Eigen::Index j, const ProjectionOptions& opt) {
    const auto n = P.dim();
    const Matrix& A = P.A();
    const Vector& b = P.b();
    constexpr double kCoef = 1e-12;
    std::vector<Eigen::Index> pos, neg, zero;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (A(i, j) > kCoef) {
            pos.push_back(i);
        } else if (A(i, j) < -kCoef) {
            neg.push_back(i);
        } else {
            zero.push_back(i);
        }
    }
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    bool filtered = false;
    if (n >= 3 && pos.size() * neg.size() > 64) {
        const Chebyshev ch = chebyshev_center(A, b);
        if (ch.radius > kInteriorRadius) {
            const bool by_pos = pos.size() <= neg.size();
            const auto& side = by_pos ? pos : neg;
            const auto& other = by_pos ? neg : pos;
            const auto nbs = facet_neighbors(A, b, side);
            for (std::size_t s = 0; s < side.size(); ++s) {
                for (const auto o : other) {
                    if (!nbs[s] || (*nbs[s])[static_cast<std::size_t>(o)]) {
                        pairs.emplace_back(by_pos ? side[s] : o, by_pos ? o : side[s]);
                    }
                }
            }
            filtered = true;
        }
    }
    if (!filtered) {
        for (const auto p : pos) {
            for (const auto q : neg) {
                pairs.emplace_back(p, q);
            }
        }
    }
    const std::size_t total = zero.size() + pairs.size();
    if (total > opt.max_rows) {
        throw Error("projection_blowup", std::to_string(total) + " intermediate rows");
    }
    auto drop_col = [&](const Eigen::RowVectorXd& row) {
        Eigen::RowVectorXd out(n - 1);
        out << row.head(j), row.tail(n - 1 - j);
        return out;
    };
    Matrix An(static_cast<Eigen::Index>(total), n - 1);
    Vector bn(static_cast<Eigen::Index>(total));
    Eigen::Index w = 0;
    for (auto i : zero) {
        An.row(w) = drop_col(A.row(i));
        bn(w) = b(i);
        ++w;
    }
    for (const auto& [p, q] : pairs) {
        const double cp = A(p, j);
        const double cq = -A(q, j);
        const Eigen::RowVectorXd row = cq * A.row(p) + cp * A.row(q);
        An.row(w) = drop_col(row);
        bn(w) = cq * b(p) + cp * b(q);
        ++w;
    }
    return remove_redundant(from_rows(An, bn, n - 1));
}

}  // namespace detail

/// Projection onto the coordinates `keep` (in the given order) by Fourier–Motzkin
/// elimination, one variable per pass with redundancy removal after each pass.
/// Variables are eliminated greedily by smallest (#positive × #negative) fill.
inline Polyhedron project_fm(const Polyhedron& P, const std::vector<Eigen::Index>& keep,
                             const ProjectionOptions& opt = {}) {
    const auto n = P.dim();
    if (keep.empty()) {
        throw Error("invalid_argument", "project_fm needs at least one kept coordinate");
    }
    std::vector<char> kept(static_cast<std::size_t>(n), 0);
    for (auto k : keep) {
        if (k < 0 || k >= n || kept[static_cast<std::size_t>(k)]) {
            throw Error("invalid_argument", "project_fm keep indices");
        }
        kept[static_cast<std::size_t>(k)] = 1;
    }
    // `labels[c]` is the original index of current column c.
    std::vector<Eigen::Index> labels(static_cast<std::size_t>(n));
    std::iota(labels.begin(), labels.end(), 0);
    Polyhedron cur = remove_redundant(P);
    for (;;) {
        Eigen::Index best = -1;
        double best_fill = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < cur.dim(); ++c) {
            if (kept[static_cast<std::size_t>(labels[static_cast<std::size_t>(c)])]) {
                continue;
            }
            double np = 0.0;
            double nn = 0.0;
            for (Eigen::Index i = 0; i < cur.rows(); ++i) {
                if (cur.A()(i, c) > 1e-12) {
                    np += 1.0;
                } else if (cur.A()(i, c) < -1e-12) {
                    nn += 1.0;
                }
            }
            if (np * nn < best_fill) {
                best_fill = np * nn;
                best = c;
            }
        }
        if (best < 0) {
            break;
        }
        cur = detail::eliminate_variable(cur, best, opt);
        labels.erase(labels.begin() + best);
    }
    // Reorder columns to match `keep`.
    Matrix A(cur.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto it = std::find(labels.begin(), labels.end(), keep[k]);
        A.col(static_cast<Eigen::Index>(k)) = cur.A().col(it - labels.begin());
    }
    return detail::from_rows(A, cur.b(), static_cast<Eigen::Index>(keep.size()));
}

/// True iff Q ⊆ P: every row of P bounds Q up to the containment tolerance.
inline bool contains(const Polyhedron& P, const Polyhedron& Q, double tol = tolerances().containment) {
    if (P.dim() != Q.dim()) {
        throw Error("dimension_mismatch", "contains");
    }
    if (P.rows() == 0) {
        return true;
    }
    if (Q.rows() == 0) {
        throw Error("unbounded", "containment of the whole space");
    }
    const detail::Chebyshev ch = detail::center_of(Q);
    if (ch.radius < -tolerances().feas) {
        return true;
    }
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const auto r = detail::lp_from(P.A().row(i).transpose(), Q.A(), Q.b(), ch.center);
        if (r.status == LpStatus::unbounded) {
            throw Error("unbounded", "contains: Q unbounded");
        }
        if (r.value > P.b()(i) + tol) {
            return false;
        }
    }
    return true;
}

/// True iff Q lies inside P with every (unit-normal) row slack ≥ margin.
inline bool strict_contains(const Polyhedron& P, const Polyhedron& Q, double margin = 1e-6) {
    if (P.dim() != Q.dim()) {
        throw Error("dimension_mismatch", "strict_contains");
    }
    if (P.rows() == 0) {
        return true;
    }
    if (Q.rows() == 0) {
        throw Error("unbounded", "containment of the whole space");
    }
    const detail::Chebyshev ch = detail::center_of(Q);
    if (ch.radius < -tolerances().feas) {
        return true;
    }
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const auto r = detail::lp_from(P.A().row(i).transpose(), Q.A(), Q.b(), ch.center);
        if (r.status == LpStatus::unbounded) {
            throw Error("unbounded", "strict_contains: Q unbounded");
        }
        if (r.value > P.b()(i) - margin) {
            return false;
        }
    }
    return true;
}

/// S_v(P, x0) = {v : (x0, v) ∈ P}, where x0 fills the leading coordinates.
/// An empty slice is returned unpruned.
inline Polyhedron slice(const Polyhedron& P, const Vector& x0, bool prune = true) {
    const auto nx = x0.size();
    if (nx > P.dim()) {
        throw Error("dimension_mismatch", "slice");
    }
    const auto nv = P.dim() - nx;
    Matrix Av = P.A().rightCols(nv);
    Vector bv = P.b() - P.A().leftCols(nx) * x0;
    // rows with no v-dependence become constant checks
    Polyhedron raw = detail::from_rows(Av, bv, nv);
    if (!prune) {
        return raw;
    }
    if (raw.rows() == 0) {
        return raw;
    }
    try {
        return remove_redundant(raw);
    } catch (const Error& e) {
        if (e.code() == "empty_set") {
            return raw;
        }
        throw;
    }
}

/// Rows sorted lexicographically by (a, b); a canonical form for file comparisons.
inline Polyhedron canonical_sort(const Polyhedron& P) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(P.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        for (Eigen::Index k = 0; k < P.dim(); ++k) {
            if (P.A()(i, k) != P.A()(j, k)) {
                return P.A()(i, k) < P.A()(j, k);
            }
        }
        return P.b()(i) < P.b()(j);
    });
    Matrix A(P.rows(), P.dim());
    Vector b(P.rows());
    for (std::size_t k = 0; k < order.size(); ++k) {
        A.row(static_cast<Eigen::Index>(k)) = P.A().row(order[k]);
        b(static_cast<Eigen::Index>(k)) = P.b()(order[k]);
    }
    return detail::from_rows(A, b, P.dim());
}

// ---------------------------------------------------------------------------
// .poly files: optional '#' comment lines, then "m n", then m rows "a1 … an b".

inline std::string to_poly_string(const Polyhedron& P, const std::string& comment = {}) {
    std::string out;
    if (!comment.empty()) {
        out += "# " + comment + "\n";
    }
    out += std::to_string(P.rows()) + " " + std::to_string(P.dim()) + "\n";
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        for (Eigen::Index j = 0; j < P.dim(); ++j) {
            out += format_double(P.A()(i, j));
            out += ' ';
        }
        out += format_double(P.b()(i));
        out += '\n';
    }
    return out;
}

/// Parses a .poly document; rows are taken verbatim (no renormalization) so
/// that written files read back bit-exact.
inline Polyhedron parse_poly(const std::string& text, std::string* comment = nullptr) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> body;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        if (line[first] == '#') {
            if (comment != nullptr) {
                *comment = line.substr(first + 1);
                const auto s = comment->find_first_not_of(' ');
                *comment = s == std::string::npos ? std::string() : comment->substr(s);
            }
            continue;
        }
        body.push_back(line);
    }
    if (body.empty()) {
        throw Error("parse_error", ".poly: missing header");
    }
    std::istringstream header(body.front());
    long m = -1;
    long n = -1;
    if (!(header >> m >> n) || m < 0 || n < 0) {
        throw Error("parse_error", ".poly: bad header");
    }
    if (static_cast<long>(body.size()) - 1 != m) {
        throw Error("parse_error", ".poly: row count mismatch");
    }
    Matrix A(m, n);
    Vector b(m);
    for (long i = 0; i < m; ++i) {
        std::istringstream row(body[static_cast<std::size_t>(i + 1)]);
        std::string tok;
        long j = 0;
        while (row >> tok) {
            if (j > n) {
                throw Error("parse_error", ".poly: too many entries");
            }
            const double v = parse_double(tok);
            if (j < n) {
                A(i, j) = v;
            } else {
                b(i) = v;
            }
            ++j;
        }
        if (j != n + 1) {
            throw Error("parse_error", ".poly: too few entries");
        }
    }
    if (m == 0) {
        return Polyhedron::universe(n);
    }
    // Files written by to_poly_string carry unit rows; keep those bit-exact.
    const Vector norms = A.rowwise().norm();
    if (((norms.array() - 1.0).abs() <= 1e-12).all()) {
        return Polyhedron::from_normalized(A, b);
    }
    return Polyhedron(A, b);
}

inline void write_poly(const std::string& path, const Polyhedron& P, const std::string& comment = {}) {
    std::ofstream out(path);
    if (!out) {
        throw Error("io_error", "cannot write " + path);
    }
    out << to_poly_string(P, comment);
}

inline Polyhedron read_poly(const std::string& path, std::string* comment = nullptr) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io_error", "cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_poly(ss.str(), comment);
}

}  // namespace feasgov
