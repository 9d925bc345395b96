#pragma once

// Terminal ingredients: the closed loop under the fictitious terminal law
// u = −K(x − G_x v) + G_u v, its tightened maximal admissible set Õ∞^ε, and
// checks of invariance, admissibility and the Lyapunov equation.

#include <string>

#include "feasgov/error.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/plant.hpp"
#include "feasgov/polyhedron.hpp"

namespace feasgov {

struct ClosedLoop {
    Matrix Abar, Bbar, Cbar, Dbar;
};

inline ClosedLoop closed_loop_matrices(const LtiModel& m, const EquilibriumBasis& eb, const Matrix& K) {
    if (K.rows() != m.nu() || K.cols() != m.nx()) {
        throw Error("dimension_mismatch", "gain K");
    }
    ClosedLoop cl;
    cl.Abar = m.A - m.B * K;
    if (spectral_radius(cl.Abar) >= 1.0) {
        throw Error("not_schur", "A - BK is not Schur");
    }
    const Matrix KG = K * eb.Gx + eb.Gu;
    cl.Bbar = m.B * KG;
    cl.Cbar = m.C - m.D * K;
    cl.Dbar = m.D * KG;
    return cl;
}

struct TerminalSet {
    Polyhedron T;  // over (x, v)
    int k_star = 0;
};

/// Õ∞^ε = O∞ ∩ O^ε built by stacking the k-step output rows until a whole
/// batch is implied by the rows collected so far.
inline TerminalSet compute_O_infty_tilde(const ClosedLoop& cl, const ConstraintSet& Y, double eps_T,
                                         int k_max = 500) {
    if (!(eps_T > 0.0 && eps_T < 1.0)) {
        throw Error("invalid_argument", "eps_T must lie in (0, 1)");
    }
    const auto nx = cl.Abar.rows();
    const auto nv = cl.Bbar.cols();
    const auto n = nx + nv;
    const auto q = Y.rows();
    const Matrix I = Matrix::Identity(nx, nx);
    Eigen::PartialPivLU<Matrix> lu(I - cl.Abar);
    const Matrix ss_gain = cl.Dbar + cl.Cbar * lu.solve(cl.Bbar);

    // Tightened steady-state rows, then the k = 0 rows.
    Matrix A(2 * q, n);
    Vector b(2 * q);
    A.topLeftCorner(q, nx).setZero();
    A.topRightCorner(q, nv) = Y.Y() * ss_gain;
    b.head(q) = (1.0 - eps_T) * Y.h();
    A.bottomLeftCorner(q, nx) = Y.Y() * cl.Cbar;
    A.bottomRightCorner(q, nv) = Y.Y() * cl.Dbar;
    b.tail(q) = Y.h();
    Polyhedron acc = remove_redundant(detail::from_rows(A, b, n));

    Matrix Ak = I;           // Āᵏ
    Matrix Sk = Matrix::Zero(nx, nx);  // Σ_{j<k} Āʲ
    const double tol = tolerances().redundancy;
    for (int k = 1; k <= k_max; ++k) {
        Sk += Ak;
        Ak = cl.Abar * Ak;
        Matrix Bk(q, n);
        Bk.leftCols(nx) = Y.Y() * cl.Cbar * Ak;
        Bk.rightCols(nv) = Y.Y() * (cl.Cbar * Sk * cl.Bbar + cl.Dbar);
        const Polyhedron batch = detail::from_rows(Bk, Y.h(), n);
        bool all_redundant = true;
        for (Eigen::Index i = 0; i < batch.rows() && all_redundant; ++i) {
            const auto r = support(batch.A().row(i).transpose(), acc);
            all_redundant = r.status == LpStatus::optimal && r.value <= batch.b()(i) + tol;
        }
        if (all_redundant) {
            return TerminalSet{acc, k - 1};
        }
        acc = remove_redundant(stack(acc, batch));
    }
    throw Error("not_finitely_determined", "no finite determination within k_max = " + std::to_string(k_max));
}

struct TerminalIngredients {
    Matrix K, P;
    Polyhedron T;
    Eigen::Index nx = 0, nv = 0;
    double eps_T = 0.0;
    int k_star = 0;
};

/// LQR gain and cost-to-go from the Riccati equation, P re-solved from the
/// closed-loop Lyapunov equation, and 𝒯 = Õ∞^{eps_T}.
inline TerminalIngredients synthesize_terminal(const LtiModel& m, const EquilibriumBasis& eb, const ConstraintSet& Y,
                                               const Matrix& Q, const Matrix& R, double eps_T, int k_max = 500) {
    const DareSolution dare = solve_dare(m.A, m.B, Q, R);
    TerminalIngredients ing;
    ing.K = dare.K;
    const ClosedLoop cl = closed_loop_matrices(m, eb, ing.K);
    ing.P = solve_discrete_lyapunov(cl.Abar, Q + ing.K.transpose() * R * ing.K);
    const TerminalSet ts = compute_O_infty_tilde(cl, Y, eps_T, k_max);
    ing.T = ts.T;
    ing.k_star = ts.k_star;
    ing.nx = m.nx();
    ing.nv = eb.nv();
    ing.eps_T = eps_T;
    return ing;
}

struct TerminalReport {
    bool invariant = false;
    bool admissible = false;
    bool lyapunov = false;
    double lyapunov_residual = 0.0;

    [[nodiscard]] bool all() const { return invariant && admissible && lyapunov; }
};

inline TerminalReport verify_terminal_assumptions(const LtiModel& m, const EquilibriumBasis& eb,
                                                  const TerminalIngredients& ing, const ConstraintSet& Y,
                                                  const Matrix& Q, const Matrix& R) {
    const ClosedLoop cl = closed_loop_matrices(m, eb, ing.K);
    const auto nx = m.nx();
    const auto nv = eb.nv();
    TerminalReport rep;
    Matrix step = Matrix::Zero(nx + nv, nx + nv);
    step.topLeftCorner(nx, nx) = cl.Abar;
    step.topRightCorner(nx, nv) = cl.Bbar;
    step.bottomRightCorner(nv, nv) = Matrix::Identity(nv, nv);
    rep.invariant = contains(affine_preimage(step, ing.T), ing.T);
    Matrix out(Y.ny(), nx + nv);
    out << cl.Cbar, cl.Dbar;
    rep.admissible = contains(affine_preimage(out, Y.polyhedron()), ing.T);
    const Matrix S = Q + ing.K.transpose() * R * ing.K;
    rep.lyapunov_residual = (cl.Abar.transpose() * ing.P * cl.Abar - ing.P + S).norm();
    rep.lyapunov = rep.lyapunov_residual <= 1e-9 * std::max(1.0, ing.P.norm());
    return rep;
}

/// Smallest ν with rank [B AB … A^{ν−1}B] = n_x.
inline int controllability_index(const Matrix& A, const Matrix& B) {
    const auto n = A.rows();
    Matrix ctrb(n, 0);
    Matrix blk = B;
    for (Eigen::Index nu = 1; nu <= n; ++nu) {
        Matrix next(n, ctrb.cols() + B.cols());
        next << ctrb, blk;
        ctrb = next;
        if (numerical_rank(ctrb) == n) {
            return static_cast<int>(nu);
        }
        blk = A * blk;
    }
    throw Error("uncontrollable", "(A, B) is not controllable");
}

}  // namespace feasgov
