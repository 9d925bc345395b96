#pragma once

// Feasibility governor: picks the auxiliary reference v closest (in ψ) to the
// requested r among those for which the MPC problem at x is feasible.
// Also a command-governor baseline and box under-approximations of Γ_N.

#include <vector>

#include "feasgov/error.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/plant.hpp"
#include "feasgov/polyhedron.hpp"
#include "feasgov/qp.hpp"

namespace feasgov {

enum class GovernorMode { exact, under_approx };
enum class PsiMode { injective, selected };

struct GovernorState {
    Vector v_prev;
    GovernorMode mode = GovernorMode::exact;
    Polyhedron F;  // over (x, v)
    Polyhedron Veps;
    PsiMode psi_mode = PsiMode::injective;
    Vector v_star;
    Vector r;
    Matrix Gz;
    std::vector<int> warm;  // active set of the previous QP
    double last_kkt = 0.0;  // KKT residual of the latest solve
};

inline GovernorState make_governor(const EquilibriumBasis& eb, const Polyhedron& Veps, const Polyhedron& F,
                                   GovernorMode mode, const Vector& r) {
    if (F.dim() <= eb.nv() || Veps.dim() != eb.nv()) {
        throw Error("dimension_mismatch", "governor sets");
    }
    GovernorState s;
    s.mode = mode;
    s.F = F;
    s.Veps = Veps;
    s.Gz = eb.Gz;
    s.r = r;
    s.psi_mode = eb.gz_injective() ? PsiMode::injective : PsiMode::selected;
    s.v_star = select_v_star(eb, Veps, r);
    return s;
}

inline double psi(const Vector& v, const Vector& r, const GovernorState& s) {
    if (s.psi_mode == PsiMode::injective) {
        return (s.Gz * v - r).squaredNorm();
    }
    return (v - s.v_star).squaredNorm();
}

inline double lyapunov_value(const Vector& v, const GovernorState& s) { return psi(v, s.r, s); }

/// Hessian of ψ in v.
inline Matrix psi_hessian(const GovernorState& s) {
    const auto nv = s.Veps.dim();
    if (s.psi_mode == PsiMode::injective) {
        return 2.0 * s.Gz.transpose() * s.Gz;
    }
    return 2.0 * Matrix::Identity(nv, nv);
}

/// Constant in V(v_{k+1}) − V(v_k) ≤ −η‖v_{k+1} − v_k‖²: strong convexity of ψ
/// gives half the smallest Hessian eigenvalue.
inline double decrease_constant(const GovernorState& s) {
    return 0.5 * Eigen::SelfAdjointEigenSolver<Matrix>(psi_hessian(s)).eigenvalues().minCoeff();
}

namespace detail {

inline QpProblem governor_qp(const Vector& x, const GovernorState& s) {
    const Polyhedron S = stack(slice(s.F, x, false), s.Veps);
    QpProblem qp;
    qp.H = psi_hessian(s);
    qp.f = s.psi_mode == PsiMode::injective ? Vector(-2.0 * s.Gz.transpose() * s.r) : Vector(-2.0 * s.v_star);
    qp.A = S.A();
    qp.b = S.b();
    return qp;
}

// argmin ψ over the slice of F at x intersected with V_ε; nullopt when empty.
inline std::optional<QpSolution> governor_solve(const Vector& x, GovernorState& s) {
    if (x.size() != s.F.dim() - s.Veps.dim()) {
        throw Error("dimension_mismatch", "governor state");
    }
    const QpProblem qp = governor_qp(x, s);
    const bool reuse = !s.warm.empty() &&
                       std::all_of(s.warm.begin(), s.warm.end(), [&](int i) { return i < qp.rows(); });
    QpSolution sol = solve_qp(qp, reuse ? &s.warm : nullptr);
    if (sol.status == QpStatus::infeasible) {
        return std::nullopt;
    }
    if (!sol.optimal()) {
        throw Error("governor_max_iter", "governor QP hit the iteration cap");
    }
    s.warm = sol.active_set;
    s.last_kkt = sol.kkt_residual;
    return sol;
}

}  // namespace detail

/// g(x) = argmin{ψ(v) : (x, v) ∈ Γ_N, v ∈ V_ε}.
inline Vector fg_step(const Vector& x, GovernorState& s) {
    if (s.mode != GovernorMode::exact) {
        throw Error("invalid_argument", "fg_step needs an exact-mode governor");
    }
    const auto sol = detail::governor_solve(x, s);
    if (!sol) {
        throw Error("state_outside_domain", "the slice of the feasible set at x is empty");
    }
    s.v_prev = sol->z;
    return sol->z;
}

/// Sets v_prev from a given (x₀, v₀), which must lie in Φ = 𝓕 ∩ (ℝⁿˣ × V_ε).
inline void initialize_underapprox(const Vector& x0, const Vector& v0, GovernorState& s) {
    Vector theta(x0.size() + v0.size());
    theta << x0, v0;
    if (!s.F.contains_point(theta, 1e-8) || !s.Veps.contains_point(v0, 1e-8)) {
        throw Error("bad_initialization", "(x0, v0) is not in the governor domain");
    }
    s.v_prev = v0;
}

/// Sets v_prev to ḡ(x₀).
inline void initialize_underapprox(const Vector& x0, GovernorState& s) {
    const auto sol = detail::governor_solve(x0, s);
    if (!sol) {
        throw Error("bad_initialization", "x0 is outside the projected domain of F");
    }
    s.v_prev = sol->z;
}

/// ḡ(x) when (x, v_prev) ∈ 𝓕, otherwise v_prev.
inline Vector fg_step_underapprox(const Vector& x, GovernorState& s) {
    if (s.mode != GovernorMode::under_approx) {
        throw Error("invalid_argument", "fg_step_underapprox needs an under-approximation governor");
    }
    if (s.v_prev.size() != s.Veps.dim()) {
        throw Error("bad_initialization", "governor has no previous reference");
    }
    Vector theta(x.size() + s.v_prev.size());
    theta << x, s.v_prev;
    if (!s.F.contains_point(theta, 1e-8)) {
        return s.v_prev;
    }
    const auto sol = detail::governor_solve(x, s);
    if (!sol) {
        // (x, v_prev) is feasible, so only rounding can get here.
        return s.v_prev;
    }
    s.v_prev = sol->z;
    return sol->z;
}

/// Command governor: the largest step λ ∈ [0, 1] from v_prev towards v_target
/// that keeps (x, v) in the closed-loop admissible set O.
inline Vector cg_step(const Vector& x, const Vector& v_prev, const Vector& v_target, const Polyhedron& O) {
    const auto nx = x.size();
    const auto nv = v_prev.size();
    if (O.dim() != nx + nv || v_target.size() != nv) {
        throw Error("dimension_mismatch", "cg_step");
    }
    Vector theta(nx + nv);
    theta << x, v_prev;
    const Vector s0 = O.b() - O.A() * theta;
    if (O.rows() > 0 && s0.minCoeff() < -tolerances().feas) {
        throw Error("cg_invariant_violated", "(x, v_prev) left the admissible set");
    }
    const Vector d = v_target - v_prev;
    const Vector slope = O.A().rightCols(nv) * d;
    double lambda = 1.0;
    for (Eigen::Index i = 0; i < O.rows(); ++i) {
        if (slope(i) > 0.0) {
            lambda = std::min(lambda, std::max(s0(i), 0.0) / slope(i));
        }
    }
    return v_prev + std::clamp(lambda, 0.0, 1.0) * d;
}

/// Axis-aligned box c + α(B − c) inside P, where B is the bounding box of P,
/// c its Chebyshev center and α ∈ [0, 1] the largest factor (by bisection)
/// for which containment holds.
inline Polyhedron box_underapproximation(const Polyhedron& P, int iterations = 40) {
    const auto n = P.dim();
    Vector lo(n), hi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        hi(j) = lp_support(Vector::Unit(n, j), P).value;
        lo(j) = -lp_support(-Vector::Unit(n, j), P).value;
    }
    const Vector c = detail::center_of(P).center;
    auto box = [&](double a) { return Polyhedron::box(c + a * (lo - c), c + a * (hi - c)); };
    double good = 0.0;
    double bad = 1.0;
    if (contains(P, box(1.0), 0.0)) {
        return box(1.0);
    }
    for (int it = 0; it < iterations; ++it) {
        const double mid = 0.5 * (good + bad);
        if (contains(P, box(mid), 0.0)) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    if (good == 0.0) {
        throw Error("empty_set", "no box fits inside the set");
    }
    return box(good);
}

/// Checks Σ ⊂ Int 𝓕 and 𝓕 ⊆ Γ_N for an under-approximation.
inline void check_underapproximation(const Polyhedron& F, const Polyhedron& gamma, const Polyhedron& sigma,
                                     double margin = 1e-6) {
    if (!contains(gamma, F)) {
        throw Error("assumption_failed", "F is not contained in the feasible set");
    }
    if (!strict_contains(F, sigma, margin)) {
        throw Error("assumption_failed", "the admissible equilibria are not interior to F");
    }
}

}  // namespace feasgov
