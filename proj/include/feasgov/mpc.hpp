#pragma once

// Condensed MPC: the horizon-N optimal control problem as the parametric QP
//     min_μ ½μᵀHμ + μᵀWθ   s.t.   Mμ + Lθ ≤ b,   θ = (x, v),
// its first-move feedback, and the feasible set Γ_N by projection.

#include <numeric>
#include <vector>

#include "feasgov/error.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/plant.hpp"
#include "feasgov/polyhedron.hpp"
#include "feasgov/qp.hpp"
#include "feasgov/terminal.hpp"

namespace feasgov {

/// Constraint rows Mμ + Lθ ≤ b of the horizon-N problem: N blocks of output
/// constraints followed by the terminal rows.
struct CondensedConstraints {
    Matrix M, L;
    Vector b;
};

inline CondensedConstraints condensed_constraints(const LtiModel& m, const ConstraintSet& Y, const Polyhedron& T,
                                                  Eigen::Index nv, int N) {
    const auto nx = m.nx();
    const auto nu = m.nu();
    const auto q = Y.rows();
    const auto nt = T.rows();
    if (T.dim() != nx + nv) {
        throw Error("dimension_mismatch", "terminal set dimension");
    }
    CondensedConstraints cc;
    cc.M = Matrix::Zero(N * q + nt, N * nu);
    cc.L = Matrix::Zero(N * q + nt, nx + nv);
    cc.b.resize(N * q + nt);
    const Matrix YC = Y.Y() * m.C;
    const Matrix YD = Y.Y() * m.D;
    // powers[k] = Aᵏ
    std::vector<Matrix> powers{Matrix::Identity(nx, nx)};
    for (int k = 1; k <= N; ++k) {
        powers.push_back(m.A * powers.back());
    }
    for (int k = 0; k < N; ++k) {
        const auto r0 = k * q;
        cc.L.block(r0, 0, q, nx) = YC * powers[k];
        for (int j = 0; j < k; ++j) {
            cc.M.block(r0, j * nu, q, nu) = YC * powers[k - 1 - j] * m.B;
        }
        cc.M.block(r0, k * nu, q, nu) = YD;
        cc.b.segment(r0, q) = Y.h();
    }
    const Matrix Tx = T.A().leftCols(nx);
    const auto r0 = N * q;
    cc.L.block(r0, 0, nt, nx) = Tx * powers[N];
    cc.L.block(r0, nx, nt, nv) = T.A().rightCols(nv);
    for (int j = 0; j < N; ++j) {
        cc.M.block(r0, j * nu, nt, nu) = Tx * powers[N - 1 - j] * m.B;
    }
    cc.b.tail(nt) = T.b();
    return cc;
}

struct CondensedMpc {
    int N = 0;
    Eigen::Index nx = 0, nu = 0, nv = 0;
    Matrix H, Wx, Wv, M, L;
    Vector b;
    Matrix Ahat, Bhat;
    Matrix Q, R, P, K;
    Matrix A, B, Gx, Gu;
    Polyhedron T;

    [[nodiscard]] Matrix W() const {
        Matrix w(H.rows(), nx + nv);
        w << Wx, Wv;
        return w;
    }
};

/// Rank test of the observability matrix of (A, Q^{1/2}).
inline bool observable(const Matrix& A, const Matrix& Q) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Q + Q.transpose()));
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix Qh = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    const auto n = A.rows();
    Matrix obs(n * n, n);
    Matrix blk = Qh;
    for (Eigen::Index k = 0; k < n; ++k) {
        obs.middleRows(k * n, n) = blk;
        blk = blk * A;
    }
    return numerical_rank(obs) == n;
}

inline CondensedMpc condense(const LtiModel& m, const EquilibriumBasis& eb, const TerminalIngredients& ing,
                             const ConstraintSet& Y, int N, const Matrix& Q, const Matrix& R) {
    m.validate();
    const auto nx = m.nx();
    const auto nu = m.nu();
    if (N < 1) {
        throw Error("invalid_argument", "horizon N must be at least 1");
    }
    if (Q.rows() != nx || Q.cols() != nx || R.rows() != nu || R.cols() != nu) {
        throw Error("dimension_mismatch", "weights Q, R");
    }
    if (Eigen::SelfAdjointEigenSolver<Matrix>(Q).eigenvalues().minCoeff() < -1e-12) {
        throw Error("invalid_weights", "Q is not positive semidefinite");
    }
    if (Eigen::SelfAdjointEigenSolver<Matrix>(R).eigenvalues().minCoeff() <= 0.0) {
        throw Error("invalid_weights", "R is not positive definite");
    }
    if (!observable(m.A, Q)) {
        throw Error("invalid_weights", "(A, Q) is not observable");
    }
    CondensedMpc c;
    c.N = N;
    c.nx = nx;
    c.nu = nu;
    c.nv = eb.nv();
    c.Q = Q;
    c.R = R;
    c.P = ing.P;
    c.K = ing.K;
    c.A = m.A;
    c.B = m.B;
    c.Gx = eb.Gx;
    c.Gu = eb.Gu;
    c.T = ing.T;

    c.Ahat = Matrix::Zero((N + 1) * nx, nx);
    c.Bhat = Matrix::Zero((N + 1) * nx, N * nu);
    Matrix Ak = Matrix::Identity(nx, nx);
    for (int k = 0; k <= N; ++k) {
        c.Ahat.middleRows(k * nx, nx) = Ak;
        Ak = m.A * Ak;
    }
    for (int k = 1; k <= N; ++k) {
        for (int j = 0; j < k; ++j) {
            c.Bhat.block(k * nx, j * nu, nx, nu) = c.Ahat.middleRows((k - 1 - j) * nx, nx) * m.B;
        }
    }
    Matrix Hhat = Matrix::Zero((N + 1) * nx, (N + 1) * nx);
    for (int k = 0; k < N; ++k) {
        Hhat.block(k * nx, k * nx, nx, nx) = Q;
    }
    Hhat.bottomRightCorner(nx, nx) = ing.P;
    c.H = c.Bhat.transpose() * Hhat * c.Bhat + kron_identity(N, R);
    c.H = 0.5 * (c.H + c.H.transpose());
    c.Wx = c.Bhat.transpose() * Hhat * c.Ahat;
    c.Wv = -(c.Wx * eb.Gx + c.H * repeat_rows(N, eb.Gu));

    const CondensedConstraints cc = condensed_constraints(m, Y, ing.T, c.nv, N);
    c.M = cc.M;
    c.L = cc.L;
    c.b = cc.b;
    return c;
}

struct MpcResult {
    Vector u;
    Vector mu;
    double J = 0.0;
    QpSolution qp;
};

/// Cost of the prediction started at x under input sequence μ, evaluated
/// directly from the stage and terminal penalties.
inline double prediction_cost(const CondensedMpc& c, const Vector& x, const Vector& v, const Vector& mu) {
    const Vector xbar = c.Gx * v;
    const Vector ubar = c.Gu * v;
    Vector xi = x;
    double J = 0.0;
    for (int k = 0; k < c.N; ++k) {
        const Vector uk = mu.segment(k * c.nu, c.nu);
        const Vector dx = xi - xbar;
        const Vector du = uk - ubar;
        J += dx.dot(c.Q * dx) + du.dot(c.R * du);
        xi = c.A * xi + c.B * uk;
    }
    const Vector dx = xi - xbar;
    return J + dx.dot(c.P * dx);
}

inline QpProblem mpc_qp(const CondensedMpc& c, const Vector& x, const Vector& v) {
    Vector theta(c.nx + c.nv);
    theta << x, v;
    QpProblem qp;
    qp.H = c.H;
    qp.f = c.Wx * x + c.Wv * v;
    qp.A = c.M;
    qp.b = c.b - c.L * theta;
    return qp;
}

/// κ(x, v) = μ*₀(x, v).
inline MpcResult mpc_feedback(const CondensedMpc& c, const Vector& x, const Vector& v,
                              const std::vector<int>* warm = nullptr) {
    if (x.size() != c.nx || v.size() != c.nv) {
        throw Error("dimension_mismatch", "mpc_feedback");
    }
    MpcResult res;
    res.qp = solve_qp(mpc_qp(c, x, v), warm);
    if (res.qp.status == QpStatus::infeasible) {
        throw Error("ocp_infeasible", "no admissible input sequence for this (x, v)");
    }
    if (!res.qp.optimal()) {
        throw Error("ocp_max_iter", "MPC QP hit the iteration cap");
    }
    res.mu = res.qp.z;
    res.u = res.mu.head(c.nu);
    res.J = prediction_cost(c, x, v, res.mu);
    return res;
}

/// Γ_N = proj_θ {(μ, θ) : Mμ + Lθ ≤ b}.
inline Polyhedron feasible_set_block(const CondensedMpc& c, const ProjectionOptions& opt = {}) {
    const auto d = c.H.rows();
    const auto n = c.nx + c.nv;
    Matrix A(c.M.rows(), d + n);
    A << c.M, c.L;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < n; ++j) {
        keep.push_back(d + j);
    }
    return project_fm(Polyhedron(A, c.b), keep, opt);
}

/// One backward step Γ_{i+1} = proj_θ(M_e⁻¹Γ_i ∩ 𝒲) with
/// 𝒲 = {(x, v, u) : Cx + Du ∈ 𝒴}.
inline Polyhedron feasible_set_step(const LtiModel& m, const EquilibriumBasis& eb, const ConstraintSet& Y,
                                    const Polyhedron& prev, const ProjectionOptions& opt = {}) {
    const auto nx = m.nx();
    const auto nu = m.nu();
    const auto nv = eb.nv();
    const auto n = nx + nv;
    if (prev.dim() != n) {
        throw Error("dimension_mismatch", "feasible_set_step");
    }
    Matrix Me = Matrix::Zero(n, n + nu);
    Me.topLeftCorner(nx, nx) = m.A;
    Me.block(0, n, nx, nu) = m.B;
    Me.block(nx, nx, nv, nv) = Matrix::Identity(nv, nv);
    Matrix Wa = Matrix::Zero(Y.rows(), n + nu);
    Wa.leftCols(nx) = Y.Y() * m.C;
    Wa.rightCols(nu) = Y.Y() * m.D;
    const Polyhedron W = detail::from_rows(Wa, Y.h(), n + nu);
    std::vector<Eigen::Index> keep(static_cast<std::size_t>(n));
    std::iota(keep.begin(), keep.end(), 0);
    return project_fm(stack(affine_preimage(Me, prev), W), keep, opt);
}

/// Γ₀ = 𝒯 and the recursion above; returns Γ₀ … Γ_N.
inline std::vector<Polyhedron> feasible_set_recursive(const LtiModel& m, const EquilibriumBasis& eb,
                                                      const ConstraintSet& Y, const Polyhedron& T, int N,
                                                      const ProjectionOptions& opt = {}) {
    std::vector<Polyhedron> gammas{T};
    for (int i = 0; i < N; ++i) {
        gammas.push_back(feasible_set_step(m, eb, Y, gammas.back(), opt));
    }
    return gammas;
}

/// Smallest horizon i ≤ N_max with (x₀, v) ∈ Γ_i, decided by phase-1
/// feasibility of the condensed constraints. Uses Γ_i ⊆ Γ_{i+1} to bisect.
inline int find_N_star(const LtiModel& m, const ConstraintSet& Y, const Polyhedron& T, const Vector& x0,
                       const Vector& v, int N_max) {
    const auto nx = m.nx();
    const auto nv = v.size();
    Vector theta(nx + nv);
    theta << x0, v;
    if (T.contains_point(theta, tolerances().feas)) {
        return 0;
    }
    auto feasible = [&](int N) {
        const CondensedConstraints cc = condensed_constraints(m, Y, T, nv, N);
        return feasibility_phase1(cc.M, cc.b - cc.L * theta).feasible;
    };
    if (N_max < 1 || !feasible(N_max)) {
        throw Error("not_found", "N* exceeds N_max = " + std::to_string(N_max));
    }
    int lo = 0;  // infeasible
    int hi = N_max;  // feasible
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (feasible(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace feasgov
