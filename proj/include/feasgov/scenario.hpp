#pragma once

// Scenario files (INI) and the synthesis pipeline that turns one into plant,
// constraint, terminal, MPC and governor data.
//
//   [system]       A B C D E F ts, or Ac Bc with ts for zero-order hold
//   [constraints]  Y h, units = rad | deg (h converted at parse)
//   [mpc]          N Q R eps_T k_max N_ungoverned
//   [governor]     eps r under = gamma:<i> | box
//   [sim]          x0 steps seed max_N

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "feasgov/error.hpp"
#include "feasgov/governor.hpp"
#include "feasgov/mpc.hpp"
#include "feasgov/numerics.hpp"
#include "feasgov/plant.hpp"
#include "feasgov/sim.hpp"
#include "feasgov/terminal.hpp"

namespace feasgov {

struct Scenario {
    // [system]
    bool continuous = false;
    Matrix Ac, Bc;  // when continuous
    Matrix A, B, C, D, E, F;
    double ts = 0.0;
    // [constraints]
    Matrix Y;
    Vector h;  // in file units
    bool degrees = false;
    // [mpc]
    int N = 10;
    Matrix Q, R;
    double eps_T = 0.01;
    int k_max = 500;
    int N_ungoverned = 0;  // 0: same as N
    // [governor]
    double eps = 0.05;
    Vector r;
    std::string under = "gamma:5";
    // [sim]
    Vector x0;
    int steps = 600;
    unsigned seed = 1;
    int max_N = 1000;

    [[nodiscard]] Vector h_rad() const { return degrees ? Vector(h * (M_PI / 180.0)) : h; }
    [[nodiscard]] int horizon_ungoverned() const { return N_ungoverned > 0 ? N_ungoverned : N; }

    [[nodiscard]] LtiModel model() const {
        LtiModel m;
        if (continuous) {
            auto [Ad, Bd] = zoh_discretize(Ac, Bc, ts);
            m.A = Ad;
            m.B = Bd;
        } else {
            m.A = A;
            m.B = B;
        }
        m.C = C;
        m.D = D;
        m.E = E;
        m.F = F;
        m.ts = ts;
        m.validate();
        return m;
    }
};

namespace detail {

using boost::property_tree::ptree;

inline std::string require(const ptree& pt, const std::string& key) {
    const auto v = pt.get_optional<std::string>(key);
    if (!v) {
        throw Error("parse_error", "scenario: missing key '" + key + "'");
    }
    return *v;
}

inline Matrix mat(const ptree& pt, const std::string& key) { return parse_matrix(require(pt, key)); }

inline Vector col(const ptree& pt, const std::string& key) {
    const Matrix m = mat(pt, key);
    if (m.cols() != 1 && m.rows() != 1) {
        throw Error("parse_error", "scenario: '" + key + "' is not a vector");
    }
    return m.cols() == 1 ? Vector(m.col(0)) : Vector(m.row(0).transpose());
}

inline double num(const ptree& pt, const std::string& key, double fallback) {
    const auto v = pt.get_optional<std::string>(key);
    return v ? parse_double(*v) : fallback;
}

inline int integer(const ptree& pt, const std::string& key, int fallback) {
    const double d = num(pt, key, fallback);
    if (d != std::floor(d)) {
        throw Error("parse_error", "scenario: '" + key + "' must be an integer");
    }
    return static_cast<int>(d);
}

// Column vectors are written as "a; b; c".
inline std::string format_col(const Vector& v) { return format_matrix(v); }

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    detail::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw Error("parse_error", std::string("scenario: ") + e.what());
    }
    Scenario s;
    s.continuous = pt.get_optional<std::string>("system.Ac").has_value();
    if (s.continuous) {
        s.Ac = detail::mat(pt, "system.Ac");
        s.Bc = detail::mat(pt, "system.Bc");
    } else {
        s.A = detail::mat(pt, "system.A");
        s.B = detail::mat(pt, "system.B");
    }
    s.C = detail::mat(pt, "system.C");
    s.D = detail::mat(pt, "system.D");
    s.E = detail::mat(pt, "system.E");
    s.F = detail::mat(pt, "system.F");
    s.ts = detail::num(pt, "system.ts", 0.0);
    if (s.continuous && !(s.ts > 0.0)) {
        throw Error("parse_error", "scenario: continuous model needs ts > 0");
    }

    s.Y = detail::mat(pt, "constraints.Y");
    s.h = detail::col(pt, "constraints.h");
    const std::string units = pt.get<std::string>("constraints.units", "rad");
    if (units != "rad" && units != "deg") {
        throw Error("parse_error", "scenario: units must be rad or deg");
    }
    s.degrees = units == "deg";

    s.N = detail::integer(pt, "mpc.N", s.N);
    s.Q = detail::mat(pt, "mpc.Q");
    s.R = detail::mat(pt, "mpc.R");
    s.eps_T = detail::num(pt, "mpc.eps_T", s.eps_T);
    s.k_max = detail::integer(pt, "mpc.k_max", s.k_max);
    s.N_ungoverned = detail::integer(pt, "mpc.N_ungoverned", 0);

    s.eps = detail::num(pt, "governor.eps", s.eps);
    s.r = detail::col(pt, "governor.r");
    s.under = pt.get<std::string>("governor.under", s.under);

    s.x0 = detail::col(pt, "sim.x0");
    s.steps = detail::integer(pt, "sim.steps", s.steps);
    s.seed = static_cast<unsigned>(detail::integer(pt, "sim.seed", static_cast<int>(s.seed)));
    s.max_N = detail::integer(pt, "sim.max_N", s.max_N);
    if (s.N < 0 || s.steps < 0 || s.max_N < 0) {
        throw Error("parse_error", "scenario: negative count");
    }
    return s;
}

inline std::string serialize_scenario(const Scenario& s) {
    std::ostringstream o;
    o << "[system]\n";
    if (s.continuous) {
        o << "Ac = " << format_matrix(s.Ac) << "\n";
        o << "Bc = " << format_matrix(s.Bc) << "\n";
    } else {
        o << "A = " << format_matrix(s.A) << "\n";
        o << "B = " << format_matrix(s.B) << "\n";
    }
    o << "C = " << format_matrix(s.C) << "\n";
    o << "D = " << format_matrix(s.D) << "\n";
    o << "E = " << format_matrix(s.E) << "\n";
    o << "F = " << format_matrix(s.F) << "\n";
    o << "ts = " << format_double(s.ts) << "\n\n";
    o << "[constraints]\n";
    o << "Y = " << format_matrix(s.Y) << "\n";
    o << "h = " << detail::format_col(s.h) << "\n";
    o << "units = " << (s.degrees ? "deg" : "rad") << "\n\n";
    o << "[mpc]\n";
    o << "N = " << s.N << "\n";
    o << "Q = " << format_matrix(s.Q) << "\n";
    o << "R = " << format_matrix(s.R) << "\n";
    o << "eps_T = " << format_double(s.eps_T) << "\n";
    o << "k_max = " << s.k_max << "\n";
    if (s.N_ungoverned > 0) {
        o << "N_ungoverned = " << s.N_ungoverned << "\n";
    }
    o << "\n[governor]\n";
    o << "eps = " << format_double(s.eps) << "\n";
    o << "r = " << detail::format_col(s.r) << "\n";
    o << "under = " << s.under << "\n\n";
    o << "[sim]\n";
    o << "x0 = " << detail::format_col(s.x0) << "\n";
    o << "steps = " << s.steps << "\n";
    o << "seed = " << s.seed << "\n";
    o << "max_N = " << s.max_N << "\n";
    return o.str();
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("io_error", "cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

enum class SetMethod { recursive, block };

/// Synthesized data of a scenario. Γ₀…Γ_N are filled by `build_feasible_sets`.
struct Synthesis {
    Scenario sc;
    LtiModel model;
    EquilibriumBasis eb;
    ConstraintSet Y;
    Polyhedron Veps, Sigma;
    TerminalIngredients ing;
    TerminalReport report;
    CondensedMpc mpc;
    std::vector<Polyhedron> gammas;
};

/// Plant, equilibria, constraint sets, terminal ingredients and the condensed
/// MPC problem. Any failed standing assumption throws "assumption_failed"
/// (or the more specific code of the failing step).
inline Synthesis synthesize(const Scenario& sc) {
    Synthesis s;
    s.sc = sc;
    s.model = sc.model();
    if (!s.model.stabilizable()) {
        throw Error("assumption_failed", "(A, B) is not stabilizable");
    }
    s.eb = equilibrium_basis(s.model);
    if (sc.Y.cols() != s.model.ny()) {
        throw Error("dimension_mismatch", "constraint rows vs outputs");
    }
    s.Y = ConstraintSet(sc.Y, sc.h_rad());
    s.Veps = admissible_reference_set(s.eb, s.Y, sc.eps);
    s.Sigma = sigma_set(s.eb, s.Veps);
    s.ing = synthesize_terminal(s.model, s.eb, s.Y, sc.Q, sc.R, sc.eps_T, sc.k_max);
    s.report = verify_terminal_assumptions(s.model, s.eb, s.ing, s.Y, sc.Q, sc.R);
    if (!s.report.all()) {
        throw Error("assumption_failed", "terminal ingredients fail invariance, admissibility or Lyapunov checks");
    }
    s.mpc = condense(s.model, s.eb, s.ing, s.Y, std::max(sc.N, 1), sc.Q, sc.R);
    if (sc.x0.size() != s.model.nx() || sc.r.size() != s.model.nz()) {
        throw Error("dimension_mismatch", "x0 or r");
    }
    return s;
}

/// Γ₀ … Γ_N. The block method fills every entry from its own projection.
inline void build_feasible_sets(Synthesis& s, SetMethod method = SetMethod::recursive, int N = -1,
                                const ProjectionOptions& opt = {}) {
    if (N < 0) {
        N = s.sc.N;
    }
    if (method == SetMethod::recursive) {
        s.gammas = feasible_set_recursive(s.model, s.eb, s.Y, s.ing.T, N, opt);
        return;
    }
    s.gammas = {s.ing.T};
    for (int i = 1; i <= N; ++i) {
        s.gammas.push_back(feasible_set_block(condense(s.model, s.eb, s.ing, s.Y, i, s.sc.Q, s.sc.R), opt));
    }
}

/// 𝓕 from the "under" key: "gamma:<i>" selects Γ_i (i < N), "box" fits a box
/// inside Γ_N. Both are checked against Σ ⊂ Int 𝓕.
inline Polyhedron under_approximation(const Synthesis& s) {
    if (s.gammas.size() != static_cast<std::size_t>(s.sc.N) + 1) {
        throw Error("invalid_argument", "feasible sets not built");
    }
    const Polyhedron& gN = s.gammas.back();
    Polyhedron F;
    const std::string& u = s.sc.under;
    if (u == "box") {
        F = box_underapproximation(gN);
    } else if (u.rfind("gamma:", 0) == 0) {
        const int i = static_cast<int>(parse_double(u.substr(6)));
        if (i < 0 || i > s.sc.N) {
            throw Error("invalid_argument", "under = " + u + " is out of range");
        }
        F = s.gammas[static_cast<std::size_t>(i)];
    } else {
        throw Error("parse_error", "governor.under must be gamma:<i> or box");
    }
    check_underapproximation(F, gN, s.Sigma);
    return F;
}

/// Run inputs for one controller. fg and fg-under need the feasible sets; the
/// ungoverned MPC is condensed at its own horizon.
inline SimSetup sim_setup(const Synthesis& s, ControllerKind kind) {
    SimSetup out;
    out.model = s.model;
    out.eb = s.eb;
    out.Y = s.Y;
    out.Veps = s.Veps;
    out.mpc = s.mpc;
    out.O = s.ing.T;
    out.K = s.ing.K;
    out.x0 = s.sc.x0;
    out.r = s.sc.r;
    switch (kind) {
        case ControllerKind::fg:
            if (s.gammas.empty()) {
                throw Error("invalid_argument", "feasible sets not built");
            }
            out.F = s.gammas.back();
            break;
        case ControllerKind::fg_underapprox:
            out.F = under_approximation(s);
            break;
        case ControllerKind::mpc:
            out.F = s.ing.T;
            if (s.sc.horizon_ungoverned() != s.mpc.N) {
                out.mpc = condense(s.model, s.eb, s.ing, s.Y, s.sc.horizon_ungoverned(), s.sc.Q, s.sc.R);
            }
            break;
        case ControllerKind::cg:
            out.F = s.ing.T;
            break;
    }
    return out;
}

/// v used by the ungoverned MPC and the horizon search: G_z† r.
inline Vector unthrottled_reference(const Synthesis& s) {
    return s.eb.Gz.completeOrthogonalDecomposition().solve(s.sc.r);
}

}  // namespace feasgov
