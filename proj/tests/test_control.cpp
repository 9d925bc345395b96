#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "feasgov/mpc.hpp"

using namespace feasgov;

namespace {

LtiModel double_integrator() {
    LtiModel m;
    m.A = parse_matrix("1 0.1; 0 1");
    m.B = parse_matrix("0; 0.1");
    m.C = parse_matrix("1 0; 0 1; 0 0");
    m.D = parse_matrix("0; 0; 1");
    m.E = parse_matrix("1 0");
    m.F = parse_matrix("0");
    m.ts = 0.1;
    return m;
}

ConstraintSet y1() { return ConstraintSet::box(Vector::Map(std::vector<double>{-1, -0.25, -0.25}.data(), 3),
                                                Vector::Map(std::vector<double>{1, 0.25, 0.25}.data(), 3)); }

// x⁺ = x + u, y = (x, u), z = x
LtiModel scalar_integrator() {
    LtiModel m;
    m.A = parse_matrix("1");
    m.B = parse_matrix("1");
    m.C = parse_matrix("1; 0");
    m.D = parse_matrix("0; 1");
    m.E = parse_matrix("1");
    m.F = parse_matrix("0");
    m.ts = 1.0;
    return m;
}

ConstraintSet fig2_set() {
    return ConstraintSet::box(Vector::Map(std::vector<double>{-1, -0.25}.data(), 2),
                              Vector::Map(std::vector<double>{1, 0.25}.data(), 2));
}

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

bool same_set(const Polyhedron& a, const Polyhedron& b) { return contains(a, b) && contains(b, a); }

struct DiSetup {
    LtiModel m = double_integrator();
    EquilibriumBasis eb = equilibrium_basis(m);
    ConstraintSet Y = y1();
    Matrix Q = Matrix::Identity(2, 2);
    Matrix R = Matrix::Identity(1, 1);
    TerminalIngredients ing = synthesize_terminal(m, eb, Y, Q, R, 0.01);
};

const DiSetup& di() {
    static const DiSetup s;
    return s;
}

}  // namespace

// ---------------------------------------------------------------- plant

TEST(Plant, DoubleIntegratorBasis) {
    const auto eb = equilibrium_basis(double_integrator());
    ASSERT_EQ(eb.nv(), 1);
    EXPECT_LT((eb.Gx - vec({1, 0})).norm(), 1e-12);
    EXPECT_LT(eb.Gu.norm(), 1e-12);
    EXPECT_NEAR(eb.Gz(0, 0), 1.0, 1e-12);
    EXPECT_LT((eb.Gy - vec({1, 0, 0})).norm(), 1e-12);
}

TEST(Plant, StaticGainBasis) {
    // x⁺ = u, z = x: every equilibrium has x = u = z.
    LtiModel m;
    m.A = parse_matrix("0");
    m.B = parse_matrix("1");
    m.C = parse_matrix("1");
    m.D = parse_matrix("0");
    m.E = parse_matrix("1");
    m.F = parse_matrix("0");
    const auto eb = equilibrium_basis(m);
    EXPECT_NEAR(eb.Gx(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(eb.Gu(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(eb.Gz(0, 0), 1.0, 1e-12);
}

TEST(Plant, KernelSpansEquilibria) {
    const LtiModel m = double_integrator();
    const auto eb = equilibrium_basis(m);
    Matrix G(eb.Gx.rows() + eb.Gu.rows() + eb.Gz.rows(), eb.nv());
    G << eb.Gx, eb.Gu, eb.Gz;
    EXPECT_LT((equilibrium_matrix(m) * G).norm(), 1e-12);
}

TEST(Plant, RankDeficientGz) {
    // z = u while every equilibrium has u = 0 and x arbitrary: G_z = 0.
    LtiModel m = double_integrator();
    m.E = parse_matrix("0 0");
    m.F = parse_matrix("1");
    try {
        equilibrium_basis(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "Gz_rank_deficient");
    }
}

TEST(Plant, ConstraintSetAssumptions) {
    EXPECT_THROW(ConstraintSet(parse_matrix("1"), vec({1})), Error);              // unbounded
    EXPECT_THROW(ConstraintSet(parse_matrix("1; -1"), vec({1, 0})), Error);       // origin on boundary
    EXPECT_NO_THROW(ConstraintSet(parse_matrix("1; -1"), vec({1, 2})));
}

TEST(Plant, AdmissibleReferenceSets) {
    const auto m2 = scalar_integrator();
    const auto V2 = admissible_reference_set(equilibrium_basis(m2), fig2_set(), 0.2);
    EXPECT_TRUE(same_set(V2, Polyhedron::box(vec({-0.8}), vec({0.8}))));

    const auto V1 = admissible_reference_set(di().eb, di().Y, 0.05);
    EXPECT_TRUE(same_set(V1, Polyhedron::box(vec({-0.95}), vec({0.95}))));
    EXPECT_EQ(V1.rows(), 2);

    const auto Vsmall = admissible_reference_set(di().eb, di().Y, 0.999);
    EXPECT_NEAR(lp_support(vec({1}), Vsmall).value, 0.001, 1e-9);
    EXPECT_THROW(admissible_reference_set(di().eb, di().Y, 1.0), Error);
}

TEST(Plant, SigmaSupport) {
    const auto V = admissible_reference_set(di().eb, di().Y, 0.05);
    const auto S = sigma_set(di().eb, V);
    EXPECT_NEAR(lp_support(vec({1, 0, 0}), S).value, 0.95, 1e-7);
    EXPECT_NEAR(lp_support(vec({0, 1, 0}), S).value, 0.0, 1e-7);
    EXPECT_TRUE(S.contains_point(vec({0.5, 0, 0.5}), 1e-12));
    EXPECT_FALSE(S.contains_point(vec({0.5, 0, 0.4}), 1e-6));
}

TEST(Plant, VStarSelection) {
    const auto V = admissible_reference_set(di().eb, di().Y, 0.05);
    EXPECT_NEAR(select_v_star(di().eb, V, vec({0.75}))(0), 0.75, 1e-9);

    const auto m2 = scalar_integrator();
    const auto eb2 = equilibrium_basis(m2);
    const auto V2 = admissible_reference_set(eb2, fig2_set(), 0.2);
    EXPECT_NEAR(select_v_star(eb2, V2, vec({4}))(0), 0.8, 1e-9);

    EquilibriumBasis wide;
    wide.Gx = Matrix::Zero(1, 2);
    wide.Gu = Matrix::Zero(1, 2);
    wide.Gz = parse_matrix("1 0");
    wide.Gy = Matrix::Zero(1, 2);
    const auto vs = select_v_star(wide, Polyhedron::box(vec({-1, -1}), vec({1, 1})), vec({0.3}));
    EXPECT_NEAR(vs(0), 0.3, 1e-7);
    EXPECT_NEAR(vs(1), 0.0, 1e-7);
}

TEST(Plant, SampledEquilibriaAreAdmissibleFixedPoints) {
    const auto& s = di();
    const double eps = 0.05;
    const auto V = admissible_reference_set(s.eb, s.Y, eps);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    for (int i = 0; i < 50; ++i) {
        const Vector v = vec({u(gen)});
        ASSERT_TRUE(V.contains_point(v, 1e-12));
        const Vector x = s.eb.Gx * v;
        const Vector uu = s.eb.Gu * v;
        EXPECT_LT((s.m.A * x + s.m.B * uu - x).norm(), 1e-12);
        const Vector y = s.m.C * x + s.m.D * uu;
        EXPECT_GE(((1.0 - eps) * s.Y.h() - s.Y.Y() * y).minCoeff(), -1e-9);
    }
}

TEST(Plant, VStarReproducesAchievableReference) {
    const auto& s = di();
    const auto V = admissible_reference_set(s.eb, s.Y, 0.05);
    for (double r : {-0.9, -0.2, 0.0, 0.4, 0.94}) {
        const Vector v = select_v_star(s.eb, V, vec({r}));
        EXPECT_NEAR((s.eb.Gz * v)(0), r, 1e-8);
    }
}

// ---------------------------------------------------------------- terminal

TEST(Terminal, ClosedLoopFormulas) {
    const auto m = scalar_integrator();
    const auto eb = equilibrium_basis(m);
    const auto cl = closed_loop_matrices(m, eb, parse_matrix("0.5"));
    EXPECT_NEAR(cl.Abar(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(cl.Bbar(0, 0), 0.5, 1e-15);
    EXPECT_LT((cl.Cbar - vec({1, -0.5})).norm(), 1e-15);
    EXPECT_LT((cl.Dbar - vec({0, 0.5})).norm(), 1e-15);
    EXPECT_THROW(closed_loop_matrices(m, eb, parse_matrix("0")), Error);

    LtiModel stable = m;
    stable.A = parse_matrix("0.5");
    const auto eb0 = equilibrium_basis(stable);
    const auto cl0 = closed_loop_matrices(stable, eb0, parse_matrix("0"));
    EXPECT_LT((cl0.Abar - stable.A).norm(), 1e-15);
    EXPECT_LT((cl0.Bbar - stable.B * eb0.Gu).norm(), 1e-15);
    EXPECT_LT((cl0.Cbar - stable.C).norm(), 1e-15);
    EXPECT_LT((cl0.Dbar - stable.D * eb0.Gu).norm(), 1e-15);
}

TEST(Terminal, ContractiveScalarDeterminedImmediately) {
    ClosedLoop cl;
    cl.Abar = parse_matrix("0.5");
    cl.Bbar = parse_matrix("0");
    cl.Cbar = parse_matrix("1");
    cl.Dbar = parse_matrix("0");
    const ConstraintSet Y = ConstraintSet::box(vec({-1}), vec({1}));
    const auto ts = compute_O_infty_tilde(cl, Y, 0.05);
    EXPECT_EQ(ts.k_star, 0);
    EXPECT_EQ(ts.T.rows(), 2);
    EXPECT_TRUE(ts.T.contains_point(vec({1, 123}), 1e-12));
    EXPECT_FALSE(ts.T.contains_point(vec({1.01, 0}), 1e-12));
}

TEST(Terminal, NotFinitelyDetermined) {
    const auto& s = di();
    const auto cl = closed_loop_matrices(s.m, s.eb, s.ing.K);
    try {
        compute_O_infty_tilde(cl, s.Y, 0.01, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "not_finitely_determined");
    }
}

TEST(Terminal, DoubleIntegratorIngredientsVerify) {
    const auto& s = di();
    EXPECT_GT(s.ing.k_star, 0);
    EXPECT_LE(s.ing.k_star, 500);
    const auto rep = verify_terminal_assumptions(s.m, s.eb, s.ing, s.Y, s.Q, s.R);
    EXPECT_TRUE(rep.invariant);
    EXPECT_TRUE(rep.admissible);
    EXPECT_LE(rep.lyapunov_residual, 1e-9);
    // P from the Lyapunov solve agrees with the Riccati solution.
    EXPECT_LT((s.ing.P - solve_dare(s.m.A, s.m.B, s.Q, s.R).P).norm(), 1e-8);
    const auto V = admissible_reference_set(s.eb, s.Y, 0.05);
    EXPECT_TRUE(strict_contains(s.ing.T, sigma_set(s.eb, V), 1e-6));
}

TEST(Terminal, MembershipMatchesClosedLoopSimulation) {
    // Oracle: run the terminal law for 400 steps and test every output plus the
    // tightened steady state.
    const auto& s = di();
    const auto cl = closed_loop_matrices(s.m, s.eb, s.ing.K);
    const Matrix ss = cl.Dbar + cl.Cbar * (Matrix::Identity(2, 2) - cl.Abar).inverse() * cl.Bbar;
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> ux(-1.2, 1.2);
    std::uniform_real_distribution<double> uv(-0.4, 0.4);
    int inside = 0;
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        const Vector x = vec({ux(gen), uv(gen)});
        const Vector v = vec({ux(gen)});
        double worst = (0.99 * s.Y.h() - s.Y.Y() * ss * v).minCoeff();
        Vector xi = x;
        for (int k = 0; k < 400; ++k) {
            worst = std::min(worst, s.Y.margin(cl.Cbar * xi + cl.Dbar * v));
            xi = cl.Abar * xi + cl.Bbar * v;
        }
        Vector theta(3);
        theta << x, v;
        const double slack = s.ing.T.min_slack(theta);
        if (std::abs(worst) < 1e-6 || std::abs(slack) < 1e-6) {
            continue;
        }
        ++checked;
        inside += worst > 0 ? 1 : 0;
        EXPECT_EQ(slack > 0, worst > 0) << theta.transpose();
    }
    EXPECT_GT(checked, 350);
    EXPECT_GT(inside, 20);
}

TEST(Terminal, Fig2TerminalSetBounds) {
    const auto m = scalar_integrator();
    const auto eb = equilibrium_basis(m);
    const auto Y = fig2_set();
    const auto ing = synthesize_terminal(m, eb, Y, parse_matrix("1"), parse_matrix("1"), 0.05);
    EXPECT_TRUE(contains(Polyhedron::box(vec({-1, -0.95}), vec({1, 0.95})), ing.T));
    EXPECT_NEAR(lp_support(vec({0, 1}), ing.T).value, 0.95, 1e-7);
    EXPECT_TRUE(verify_terminal_assumptions(m, eb, ing, Y, parse_matrix("1"), parse_matrix("1")).all());
}

TEST(Terminal, MonotoneTightening) {
    const auto& s = di();
    const auto tight = synthesize_terminal(s.m, s.eb, s.Y, s.Q, s.R, 0.05);
    EXPECT_TRUE(contains(s.ing.T, tight.T));
    EXPECT_FALSE(contains(tight.T, s.ing.T));
}

TEST(Terminal, RowOrderInvariance) {
    const auto& s = di();
    Matrix Yp = s.Y.Y();
    Vector hp = s.Y.h();
    Yp.row(0).swap(Yp.row(5));
    std::swap(hp(0), hp(5));
    Yp.row(1).swap(Yp.row(3));
    std::swap(hp(1), hp(3));
    const auto ing = synthesize_terminal(s.m, s.eb, ConstraintSet(Yp, hp), s.Q, s.R, 0.01);
    EXPECT_EQ(ing.k_star, s.ing.k_star);
    EXPECT_TRUE(same_set(ing.T, s.ing.T));
}

TEST(Terminal, ConservativeEquilibriumTerminalSet) {
    LtiModel m = scalar_integrator();
    m.A = parse_matrix("0.5");
    const auto eb = equilibrium_basis(m);
    const auto Y = fig2_set();
    TerminalIngredients ing;
    ing.K = Matrix::Zero(1, 1);
    ing.P = Matrix::Zero(1, 1);
    ing.T = sigma_set(eb, admissible_reference_set(eb, Y, 0.1));
    const Matrix zero = Matrix::Zero(1, 1);
    const auto rep = verify_terminal_assumptions(m, eb, ing, Y, zero, zero);
    EXPECT_TRUE(rep.invariant);
    EXPECT_TRUE(rep.admissible);
}

TEST(Terminal, ControllabilityIndex) {
    EXPECT_EQ(controllability_index(double_integrator().A, double_integrator().B), 2);
    EXPECT_EQ(controllability_index(parse_matrix("3 1; 2 7"), Matrix::Identity(2, 2)), 1);
    try {
        controllability_index(Matrix::Identity(2, 2), vec({1, 0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "uncontrollable");
    }
}

// ---------------------------------------------------------------- mpc

TEST(Mpc, ScalarHorizonOneMatrices) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    const auto m = scalar_integrator();
    const auto eb = equilibrium_basis(m);
    TerminalIngredients ing;
    ing.K = parse_matrix("1");
    ing.P = Matrix::Constant(1, 1, phi);
    ing.T = Polyhedron::box(vec({-1, -1}), vec({1, 1}));
    const auto c = condense(m, eb, ing, fig2_set(), 1, parse_matrix("1"), parse_matrix("1"));
    EXPECT_NEAR(c.H(0, 0), phi * phi, 1e-12);
    EXPECT_NEAR(c.Wx(0, 0), phi, 1e-12);
    EXPECT_NEAR(c.Wv(0, 0), -phi, 1e-12);
}

TEST(Mpc, LinearTermMatchesCostGradient) {
    // Oracle: central differences of the directly simulated cost (exact for quadratics).
    const auto& s = di();
    const auto c = condense(s.m, s.eb, s.ing, s.Y, 6, s.Q, s.R);
    std::mt19937 gen(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vector x = vec({u(gen), u(gen)});
    const Vector v = vec({u(gen)});
    Vector mu(6);
    for (int i = 0; i < 6; ++i) {
        mu(i) = u(gen);
    }
    const Vector grad = c.H * mu + c.Wx * x + c.Wv * v;
    for (int i = 0; i < 6; ++i) {
        const double h = 1e-4;
        Vector p = mu, q = mu;
        p(i) += h;
        q(i) -= h;
        const double fd = (prediction_cost(c, x, v, p) - prediction_cost(c, x, v, q)) / (2 * h);
        EXPECT_NEAR(fd, 2.0 * grad(i), 1e-7);
    }
    const Matrix HR = c.H - kron_identity(6, s.R);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(HR).eigenvalues().minCoeff(), -1e-10);
    EXPECT_EQ(c.M.rows(), 6 * s.Y.rows() + s.ing.T.rows());
}

TEST(Mpc, RejectsUnobservableWeights) {
    const auto& s = di();
    Matrix Q = Matrix::Zero(2, 2);
    Q(1, 1) = 1.0;  // only velocity is penalized
    EXPECT_THROW(condense(s.m, s.eb, s.ing, s.Y, 3, Q, s.R), Error);
}

TEST(Mpc, EquilibriumHasZeroCost) {
    const auto& s = di();
    const auto c = condense(s.m, s.eb, s.ing, s.Y, 10, s.Q, s.R);
    const Vector v = vec({0.3});
    const auto res = mpc_feedback(c, s.eb.Gx * v, v);
    EXPECT_LT((res.u - s.eb.Gu * v).norm(), 1e-9);
    EXPECT_NEAR(res.J, 0.0, 1e-12);
}

TEST(Mpc, InfeasibleInitialConditionOfTheExample) {
    const auto& s = di();
    const auto c = condense(s.m, s.eb, s.ing, s.Y, 10, s.Q, s.R);
    try {
        mpc_feedback(c, vec({-1, 0}), vec({0.75}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "ocp_infeasible");
    }
    const auto cc = condensed_constraints(s.m, s.Y, s.ing.T, 1, 10);
    EXPECT_FALSE(feasibility_phase1(cc.M, cc.b - cc.L * vec({-1, 0, 0.75})).feasible);
}

TEST(Mpc, CostDecreasesAlongClosedLoop) {
    const auto& s = di();
    const auto c = condense(s.m, s.eb, s.ing, s.Y, 10, s.Q, s.R);
    const Vector v = vec({0.2});
    Vector x = vec({-0.4, 0.05});
    ASSERT_LE(find_N_star(s.m, s.Y, s.ing.T, x, v, 10), 10);
    auto res = mpc_feedback(c, x, v);
    for (int k = 0; k < 200; ++k) {
        const Vector dx = x - s.eb.Gx * v;
        const Vector xn = s.m.A * x + s.m.B * res.u;
        ASSERT_GE(s.Y.margin(s.m.C * x + s.m.D * res.u), -1e-8);
        const auto next = mpc_feedback(c, xn, v, &res.qp.active_set);
        EXPECT_LE(next.J - res.J, -dx.dot(s.Q * dx) + 1e-6) << "step " << k;
        x = xn;
        res = next;
    }
    EXPECT_LT((x - s.eb.Gx * v).norm(), 1e-4);
}

TEST(Mpc, BlockEqualsRecursiveFig2) {
    const auto m = scalar_integrator();
    const auto eb = equilibrium_basis(m);
    const auto Y = fig2_set();
    const Matrix one = parse_matrix("1");
    const auto ing = synthesize_terminal(m, eb, Y, one, one, 0.05);
    const auto rec = feasible_set_recursive(m, eb, Y, ing.T, 2);
    EXPECT_TRUE(same_set(rec[0], ing.T));
    for (int N : {1, 2}) {
        const auto blk = feasible_set_block(condense(m, eb, ing, Y, N, one, one));
        EXPECT_TRUE(same_set(blk, rec[static_cast<std::size_t>(N)])) << "N=" << N;
    }
}

TEST(Mpc, Fig2GammaTwoMatchesPhaseOneGrid) {
    const auto m = scalar_integrator();
    const auto eb = equilibrium_basis(m);
    const auto Y = fig2_set();
    const Matrix one = parse_matrix("1");
    const auto ing = synthesize_terminal(m, eb, Y, one, one, 0.05);
    const auto g2 = feasible_set_recursive(m, eb, Y, ing.T, 2)[2];
    const auto cc = condensed_constraints(m, Y, ing.T, 1, 2);
    for (int i = 0; i < 41; ++i) {
        for (int j = 0; j < 41; ++j) {
            const Vector theta = vec({-1.2 + 0.06 * i + 1e-4, -1.2 + 0.06 * j + 1e-4});
            if (std::abs(g2.min_slack(theta)) < 1e-7) {
                continue;
            }
            const bool oracle = feasibility_phase1(cc.M, cc.b - cc.L * theta).feasible;
            EXPECT_EQ(g2.contains_point(theta, 0.0), oracle) << theta.transpose();
        }
    }
}

TEST(Mpc, DoubleIntegratorSetsNestAndAgree) {
    const auto& s = di();
    const auto rec = feasible_set_recursive(s.m, s.eb, s.Y, s.ing.T, 10);
    for (std::size_t i = 0; i + 1 < rec.size(); ++i) {
        EXPECT_TRUE(contains(rec[i + 1], rec[i])) << "i=" << i;
    }
    for (int N : {1, 2, 5}) {
        const auto blk = feasible_set_block(condense(s.m, s.eb, s.ing, s.Y, N, s.Q, s.R));
        EXPECT_TRUE(same_set(blk, rec[static_cast<std::size_t>(N)])) << "N=" << N;
    }
    const auto V = admissible_reference_set(s.eb, s.Y, 0.05);
    EXPECT_TRUE(strict_contains(rec[10], sigma_set(s.eb, V), 1e-6));

    // Γ₁₀ membership against phase-1 on a (x₁, v) grid with x₂ = 0.
    const auto cc = condensed_constraints(s.m, s.Y, s.ing.T, 1, 10);
    for (int i = 0; i < 21; ++i) {
        for (int j = 0; j < 21; ++j) {
            const Vector theta = vec({-1.05 + 0.105 * i, 0.0, -1.05 + 0.105 * j});
            if (std::abs(rec[10].min_slack(theta)) < 1e-7) {
                continue;
            }
            const bool oracle = feasibility_phase1(cc.M, cc.b - cc.L * theta).feasible;
            EXPECT_EQ(rec[10].contains_point(theta, 0.0), oracle) << theta.transpose();
        }
    }
}

TEST(Mpc, NStarTrivialAndNotFound) {
    const auto& s = di();
    EXPECT_EQ(find_N_star(s.m, s.Y, s.ing.T, vec({0.2, 0}), vec({0.2}), 10), 0);
    try {
        find_N_star(s.m, s.Y, s.ing.T, vec({-1, 0}), vec({0.75}), 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "not_found");
    }
    // Agrees with a linear scan.
    const int ns = find_N_star(s.m, s.Y, s.ing.T, vec({-1, 0}), vec({0.75}), 60);
    for (int N = 1; N <= ns; ++N) {
        const auto cc = condensed_constraints(s.m, s.Y, s.ing.T, 1, N);
        EXPECT_EQ(feasibility_phase1(cc.M, cc.b - cc.L * vec({-1, 0, 0.75})).feasible, N == ns) << N;
    }
}
