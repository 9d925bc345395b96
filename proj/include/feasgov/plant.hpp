#pragma once

#include <string>

#include "feasgov/error.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/polyhedron.hpp"
#include "feasgov/qp.hpp"

namespace feasgov {

/// x⁺ = Ax + Bu,  y = Cx + Du (constrained),  z = Ex + Fu (tracked).
struct LtiModel {
    Matrix A, B, C, D, E, F;
    double ts = 0.0;

    [[nodiscard]] Eigen::Index nx() const { return A.rows(); }
    [[nodiscard]] Eigen::Index nu() const { return B.cols(); }
    [[nodiscard]] Eigen::Index ny() const { return C.rows(); }
    [[nodiscard]] Eigen::Index nz() const { return E.rows(); }

    void validate() const {
        const auto n = nx();
        const auto m = nu();
        if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != ny() || D.cols() != m ||
            E.cols() != n || F.rows() != nz() || F.cols() != m) {
            throw Error("dimension_mismatch", "LtiModel matrices are inconsistent");
        }
        if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite() || !E.allFinite() ||
            !F.allFinite()) {
            throw Error("non_finite", "LtiModel");
        }
    }

    /// Stabilizability check: the Riccati iteration with Q = I, R = I converges.
    [[nodiscard]] bool stabilizable() const {
        try {
            solve_dare(A, B, Matrix::Identity(nx(), nx()), Matrix::Identity(nu(), nu()));
            return true;
        } catch (const Error&) {
            return false;
        }
    }
};

/// Kernel basis of Z split into the equilibrium maps x̄ = G_x v, ū = G_u v,
/// z̄ = G_z v, and ȳ = G_y v.
struct EquilibriumBasis {
    Matrix Gx, Gu, Gz, Gy;

    [[nodiscard]] Eigen::Index nv() const { return Gx.cols(); }
    [[nodiscard]] bool gz_injective() const { return numerical_rank(Gz) == nv(); }
};

/// 𝒴 = {y : Yy ≤ h}, compact with the origin in its interior.
class ConstraintSet {
public:
    ConstraintSet() = default;

    ConstraintSet(const Matrix& Y, const Vector& h) : set_(Y, h) {
        if (set_.rows() == 0) {
            throw Error("assumption_failed", "constraint set has no rows (not compact)");
        }
        if (set_.b().minCoeff() <= 0.0) {
            throw Error("assumption_failed", "origin is not interior to the constraint set");
        }
        for (Eigen::Index j = 0; j < set_.dim(); ++j) {
            Vector e = Vector::Zero(set_.dim());
            e(j) = 1.0;
            if (support(e, set_).status != LpStatus::optimal || support(-e, set_).status != LpStatus::optimal) {
                throw Error("assumption_failed", "constraint set is unbounded");
            }
        }
    }

    /// Axis-aligned bounds lo ≤ y ≤ hi.
    static ConstraintSet box(const Vector& lo, const Vector& hi) {
        const auto n = lo.size();
        Matrix Y(2 * n, n);
        Y << Matrix::Identity(n, n), -Matrix::Identity(n, n);
        Vector h(2 * n);
        h << hi, -lo;
        return ConstraintSet(Y, h);
    }

    [[nodiscard]] const Polyhedron& polyhedron() const { return set_; }
    [[nodiscard]] const Matrix& Y() const { return set_.A(); }
    [[nodiscard]] const Vector& h() const { return set_.b(); }
    [[nodiscard]] Eigen::Index rows() const { return set_.rows(); }
    [[nodiscard]] Eigen::Index ny() const { return set_.dim(); }

    /// Smallest slack h − Yy (the constraint margin of an output sample).
    [[nodiscard]] double margin(const Vector& y) const { return set_.min_slack(y); }

private:
    Polyhedron set_;
};

/// Z = [[I − A, −B, 0], [E, F, −I]]; its kernel parameterizes the equilibria.
inline Matrix equilibrium_matrix(const LtiModel& m) {
    const auto nx = m.nx();
    const auto nu = m.nu();
    const auto nz = m.nz();
    Matrix Z = Matrix::Zero(nx + nz, nx + nu + nz);
    Z.topLeftCorner(nx, nx) = Matrix::Identity(nx, nx) - m.A;
    Z.block(0, nx, nx, nu) = -m.B;
    Z.bottomLeftCorner(nz, nx) = m.E;
    Z.block(nx, nx, nz, nu) = m.F;
    Z.bottomRightCorner(nz, nz) = -Matrix::Identity(nz, nz);
    return Z;
}

/// Splits ker Z into (G_x, G_u, G_z) and forms G_y = C G_x + D G_u. When G_z
/// is square and invertible the basis is re-parameterized so that G_z = I,
/// i.e. the auxiliary reference is expressed in tracking-output units.
inline EquilibriumBasis equilibrium_basis(const LtiModel& m) {
    m.validate();
    const Matrix G = kernel_basis(equilibrium_matrix(m));
    const auto nx = m.nx();
    const auto nu = m.nu();
    const auto nz = m.nz();
    EquilibriumBasis eb;
    eb.Gx = G.topRows(nx);
    eb.Gu = G.middleRows(nx, nu);
    eb.Gz = G.bottomRows(nz);
    const auto nv = G.cols();
    const auto rz = numerical_rank(eb.Gz);
    if (rz < std::min(nz, nv)) {
        throw Error("Gz_rank_deficient", "G_z is not full rank");
    }
    if (nz == nv) {
        const Matrix Ginv = eb.Gz.inverse();
        eb.Gx = eb.Gx * Ginv;
        eb.Gu = eb.Gu * Ginv;
        eb.Gz = Matrix::Identity(nz, nz);
    }
    eb.Gy = m.C * eb.Gx + m.D * eb.Gu;
    return eb;
}

/// V_ε = {v : Y G_y v ≤ (1 − ε) h}.
inline Polyhedron admissible_reference_set(const EquilibriumBasis& eb, const ConstraintSet& Y, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw Error("invalid_argument", "eps must lie in (0, 1)");
    }
    Polyhedron V = detail::from_rows(Y.Y() * eb.Gy, (1.0 - eps) * Y.h(), eb.nv());
    if (V.rows() == 0) {
        return V;
    }
    return remove_redundant(V);
}

/// Σ = {(x, v) : x = G_x v, v ∈ V_ε}, equalities as inequality pairs.
inline Polyhedron sigma_set(const EquilibriumBasis& eb, const Polyhedron& Veps) {
    const auto nx = eb.Gx.rows();
    const auto nv = eb.nv();
    Matrix A = Matrix::Zero(2 * nx + Veps.rows(), nx + nv);
    Vector b = Vector::Zero(2 * nx + Veps.rows());
    A.topLeftCorner(nx, nx) = Matrix::Identity(nx, nx);
    A.block(0, nx, nx, nv) = -eb.Gx;
    A.block(nx, 0, nx, nx) = -Matrix::Identity(nx, nx);
    A.block(nx, nx, nx, nv) = eb.Gx;
    A.bottomRightCorner(Veps.rows(), nv) = Veps.A();
    b.tail(Veps.rows()) = Veps.b();
    return detail::from_rows(A, b, nx + nv);
}

/// v*_r ∈ argmin_{v ∈ V_ε} ‖G_z v − r‖². For non-injective G_z the minimum-norm
/// element is selected through the penalty ‖G_z v − r‖² + 1e-8‖v‖².
inline Vector select_v_star(const EquilibriumBasis& eb, const Polyhedron& Veps, const Vector& r) {
    const auto nv = eb.nv();
    if (r.size() != eb.Gz.rows()) {
        throw Error("dimension_mismatch", "reference size");
    }
    QpProblem qp;
    qp.H = 2.0 * eb.Gz.transpose() * eb.Gz;
    if (!eb.gz_injective()) {
        qp.H += 2e-8 * Matrix::Identity(nv, nv);
    }
    qp.f = -2.0 * eb.Gz.transpose() * r;
    qp.A = Veps.A();
    qp.b = Veps.b();
    const QpSolution sol = solve_qp(qp);
    if (!sol.optimal()) {
        throw Error("empty_set", "V_eps is empty");
    }
    return sol.z;
}

}  // namespace feasgov
