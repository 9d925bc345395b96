#pragma once

// Closed-loop simulation x⁺ = Ax + Bκ(x, v) with v from a governor, logging,
// inline invariant monitors and response metrics.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "feasgov/error.hpp"
#include "feasgov/governor.hpp"
#include "feasgov/mpc.hpp"
#include "feasgov/plant.hpp"

namespace feasgov {

enum class ControllerKind { fg, fg_underapprox, mpc, cg };

inline const char* to_string(ControllerKind c) {
    switch (c) {
        case ControllerKind::fg: return "fg";
        case ControllerKind::fg_underapprox: return "fg-under";
        case ControllerKind::mpc: return "mpc";
        case ControllerKind::cg: return "cg";
    }
    return "unknown";
}

inline ControllerKind parse_controller(const std::string& s) {
    if (s == "fg") {
        return ControllerKind::fg;
    }
    if (s == "fg-under" || s == "fg_under" || s == "fg_underapprox") {
        return ControllerKind::fg_underapprox;
    }
    if (s == "mpc") {
        return ControllerKind::mpc;
    }
    if (s == "cg") {
        return ControllerKind::cg;
    }
    throw Error("invalid_argument", "unknown controller '" + s + "'");
}

/// Everything a run needs, already synthesized.
struct SimSetup {
    LtiModel model;
    EquilibriumBasis eb;
    ConstraintSet Y;
    Polyhedron Veps;
    CondensedMpc mpc;  // unused by cg
    Polyhedron F;      // governor set: Γ_N (fg) or 𝓕 (fg-under)
    Polyhedron O;      // closed-loop admissible set for cg
    Matrix K;          // LQR gain for cg
    Vector x0;
    Vector r;
};

struct SimLog {
    std::vector<Vector> x, u, y, z, v;
    std::vector<double> V, J, margin, fg_ms, mpc_ms;
    std::vector<double> kkt;  // largest QP KKT residual of the step, not exported
    std::vector<char> fg_active;

    [[nodiscard]] std::size_t size() const { return x.size(); }
};

struct MonitorLimits {
    double margin = -1e-8;
    double lyapunov = 1e-9;
    double cost_rel = 1e-6;
};

namespace detail {

[[noreturn]] inline void violated(int k, const std::string& what) {
    throw Error("invariant_violated", "step " + std::to_string(k) + ": " + what);
}

inline double ms_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t).count();
}

// Starting reference for the command governor: closest equilibrium to x₀
// among the admissible ones with (x₀, v) ∈ O.
inline Vector cg_initial_reference(const SimSetup& s) {
    const auto nv = s.eb.nv();
    const Polyhedron S = stack(slice(s.O, s.x0, false), s.Veps);
    QpProblem qp;
    qp.H = 2.0 * s.eb.Gx.transpose() * s.eb.Gx + 1e-10 * Matrix::Identity(nv, nv);
    qp.f = -2.0 * s.eb.Gx.transpose() * s.x0;
    qp.A = S.A();
    qp.b = S.b();
    const QpSolution sol = solve_qp(qp);
    if (!sol.optimal()) {
        throw Error("bad_initialization", "x0 is outside the command governor domain");
    }
    return sol.z;
}

}  // namespace detail

/// Runs `steps` transitions and logs steps + 1 samples (the last sample still
/// records the control that would be applied). Monitors abort the run with
/// "invariant_violated" naming the step and the invariant.
inline SimLog simulate(const SimSetup& s, ControllerKind kind, int steps, const MonitorLimits& lim = {}) {
    if (steps < 0) {
        throw Error("invalid_argument", "steps must be nonnegative");
    }
    const LtiModel& m = s.model;
    const bool governed = kind != ControllerKind::mpc;
    GovernorState gov;
    Vector v_fixed;
    Vector v_cg;
    switch (kind) {
        case ControllerKind::fg:
            gov = make_governor(s.eb, s.Veps, s.F, GovernorMode::exact, s.r);
            break;
        case ControllerKind::fg_underapprox:
            gov = make_governor(s.eb, s.Veps, s.F, GovernorMode::under_approx, s.r);
            initialize_underapprox(s.x0, gov);
            break;
        case ControllerKind::mpc:
            gov = make_governor(s.eb, s.Veps, s.F, GovernorMode::exact, s.r);
            v_fixed = s.eb.Gz.completeOrthogonalDecomposition().solve(s.r);
            break;
        case ControllerKind::cg:
            gov = make_governor(s.eb, s.Veps, s.O, GovernorMode::exact, s.r);
            v_cg = detail::cg_initial_reference(s);
            break;
    }
    const double eta = decrease_constant(gov);

    SimLog log;
    Vector x = s.x0;
    std::vector<int> warm;
    std::optional<double> prev_V;
    std::optional<double> prev_J;
    double prev_stage = 0.0;
    Vector prev_v;
    for (int k = 0; k <= steps; ++k) {
        auto t0 = std::chrono::steady_clock::now();
        gov.last_kkt = 0.0;
        Vector v;
        switch (kind) {
            case ControllerKind::fg: v = fg_step(x, gov); break;
            case ControllerKind::fg_underapprox: v = fg_step_underapprox(x, gov); break;
            case ControllerKind::mpc: v = v_fixed; break;
            case ControllerKind::cg:
                v_cg = cg_step(x, v_cg, gov.v_star, s.O);
                v = v_cg;
                break;
        }
        const double fg_ms = governed ? detail::ms_since(t0) : 0.0;

        t0 = std::chrono::steady_clock::now();
        Vector u;
        double J = 0.0;
        double kkt = gov.last_kkt;
        if (kind == ControllerKind::cg) {
            u = -s.K * (x - s.eb.Gx * v) + s.eb.Gu * v;
        } else {
            const MpcResult res = mpc_feedback(s.mpc, x, v, warm.empty() ? nullptr : &warm);
            warm = res.qp.active_set;
            u = res.u;
            J = res.J;
            kkt = std::max(kkt, res.qp.kkt_residual);
        }
        const double mpc_ms = detail::ms_since(t0);

        const Vector y = m.C * x + m.D * u;
        const Vector z = m.E * x + m.F * u;
        const double margin = s.Y.margin(y);
        const double V = lyapunov_value(v, gov);

        if (margin < lim.margin) {
            detail::violated(k, "constraint margin " + format_double(margin));
        }
        if (governed && prev_V) {
            const double dV = V - *prev_V;
            if (dV > lim.lyapunov) {
                detail::violated(k, "lyapunov_monotone dV = " + format_double(dV));
            }
            const double dv2 = (v - prev_v).squaredNorm();
            if (kind != ControllerKind::cg && dv2 > 0.0 && dV > -eta * dv2 + lim.lyapunov) {
                detail::violated(k, "lyapunov_decrease dV = " + format_double(dV) + " bound " +
                                        format_double(-eta * dv2));
            }
        }
        if (kind == ControllerKind::mpc && prev_J) {
            const double allowed = *prev_J - prev_stage + lim.cost_rel * std::max(1.0, *prev_J);
            if (J > allowed) {
                detail::violated(k, "cost_decrease J = " + format_double(J) + " > " + format_double(allowed));
            }
        }

        log.x.push_back(x);
        log.u.push_back(u);
        log.y.push_back(y);
        log.z.push_back(z);
        log.v.push_back(v);
        log.V.push_back(V);
        log.J.push_back(J);
        log.margin.push_back(margin);
        log.fg_ms.push_back(fg_ms);
        log.mpc_ms.push_back(mpc_ms);
        log.kkt.push_back(kkt);
        log.fg_active.push_back(governed && (v - gov.v_star).norm() > 1e-9 ? 1 : 0);

        if (kind == ControllerKind::mpc) {
            const Vector dx = x - s.eb.Gx * v;
            const Vector du = u - s.eb.Gu * v;
            prev_stage = dx.dot(s.mpc.Q * dx) + du.dot(s.mpc.R * du);
        }
        prev_V = V;
        prev_J = J;
        prev_v = v;
        x = m.A * x + m.B * u;
    }
    return log;
}

struct Metrics {
    std::optional<int> rise_time_steps;
    std::optional<int> settling_time_steps;
    std::optional<int> v_convergence_step;
    double max_violation = 0.0;
    double TAVE = 0.0;  // seconds
    double TMAX = 0.0;  // seconds
};

/// Rise time from the first 10% to the first 90% crossing of the step in the
/// first tracked output, settling at the last exit from the ±2% band, and the
/// first step after which v stays within 1e-9 of `v_star` (when given).
inline Metrics compute_metrics(const SimLog& log, const Vector& r, const std::optional<Vector>& v_star = {}) {
    if (log.size() == 0) {
        throw Error("invalid_argument", "empty log");
    }
    Metrics out;
    const double z0 = log.z.front()(0);
    const double span = r(0) - z0;
    auto first_cross = [&](double frac) -> std::optional<int> {
        if (span == 0.0) {
            return std::nullopt;
        }
        const double level = z0 + frac * span;
        for (std::size_t k = 0; k < log.size(); ++k) {
            if ((log.z[k](0) - level) * span >= 0.0) {
                return static_cast<int>(k);
            }
        }
        return std::nullopt;
    };
    const auto k10 = first_cross(0.1);
    const auto k90 = first_cross(0.9);
    if (k10 && k90) {
        out.rise_time_steps = *k90 - *k10;
    }
    const double band = 0.02 * std::abs(span);
    int last_out = -1;
    for (std::size_t k = 0; k < log.size(); ++k) {
        if (std::abs(log.z[k](0) - r(0)) > band) {
            last_out = static_cast<int>(k);
        }
    }
    if (last_out + 1 < static_cast<int>(log.size())) {
        out.settling_time_steps = last_out + 1;
    }
    if (v_star) {
        int t = static_cast<int>(log.size());
        for (int k = static_cast<int>(log.size()) - 1; k >= 0; --k) {
            if ((log.v[static_cast<std::size_t>(k)] - *v_star).norm() > 1e-9) {
                break;
            }
            t = k;
        }
        if (t < static_cast<int>(log.size())) {
            out.v_convergence_step = t;
        }
    }
    double total = 0.0;
    for (std::size_t k = 0; k < log.size(); ++k) {
        out.max_violation = std::max(out.max_violation, -log.margin[k]);
        const double t = (log.fg_ms[k] + log.mpc_ms[k]) * 1e-3;
        total += t;
        out.TMAX = std::max(out.TMAX, t);
    }
    out.TAVE = total / static_cast<double>(log.size());
    return out;
}

namespace detail {

inline std::string g12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

}  // namespace detail

inline std::string sim_csv(const SimLog& log) {
    std::string out = "k";
    auto cols = [&](const char* p, Eigen::Index n) {
        for (Eigen::Index i = 1; i <= n; ++i) {
            out += ",";
            out += p;
            out += std::to_string(i);
        }
    };
    if (log.size() > 0) {
        cols("x", log.x[0].size());
        cols("u", log.u[0].size());
        cols("y", log.y[0].size());
        cols("z", log.z[0].size());
        cols("v", log.v[0].size());
    }
    out += ",V,J,margin,fg_ms,mpc_ms,fg_active\n";
    for (std::size_t k = 0; k < log.size(); ++k) {
        out += std::to_string(k);
        for (const auto* vec : {&log.x[k], &log.u[k], &log.y[k], &log.z[k], &log.v[k]}) {
            for (Eigen::Index i = 0; i < vec->size(); ++i) {
                out += "," + detail::g12((*vec)(i));
            }
        }
        for (double d : {log.V[k], log.J[k], log.margin[k], log.fg_ms[k], log.mpc_ms[k]}) {
            out += "," + detail::g12(d);
        }
        out += log.fg_active[k] ? ",1\n" : ",0\n";
    }
    return out;
}

inline void write_sim_csv(const std::string& path, const SimLog& log) {
    std::ofstream f(path);
    if (!f) {
        throw Error("io_error", "cannot write " + path);
    }
    f << sim_csv(log);
}

}  // namespace feasgov
