#include <gtest/gtest.h>

#include <random>

#include "feasgov/polyhedron.hpp"

using namespace feasgov;

namespace {

Polyhedron unit_box(int n) { return Polyhedron::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)); }

Polyhedron interval(double lo, double hi) { return Polyhedron::box(Vector::Constant(1, lo), Vector::Constant(1, hi)); }

// {y ≥ 0, x + y ≤ 1, −x + y ≤ 1}
Polyhedron triangle() {
    Matrix A(3, 2);
    A << 0, -1, 1, 1, -1, 1;
    return Polyhedron(A, Vector::Ones(3).cwiseProduct(Vector::Map(std::vector<double>{0, 1, 1}.data(), 3)));
}

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

bool same_set(const Polyhedron& a, const Polyhedron& b) { return contains(a, b) && contains(b, a); }

Polyhedron random_polytope(std::mt19937& gen, int n, int m) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    Matrix A(m + 2 * n, n);
    Vector b(m + 2 * n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            A(i, j) = g(gen);
        }
        b(i) = u(gen) * A.row(i).norm();
    }
    // bounding box keeps it compact
    A.bottomRows(2 * n) << Matrix::Identity(n, n) * 1.0, -Matrix::Identity(n, n);
    b.tail(2 * n).setConstant(3.0);
    return Polyhedron(A, b);
}

}  // namespace

TEST(LpSupport, BoxAndTriangle) {
    EXPECT_NEAR(lp_support(v2(1, 0), unit_box(2)).value, 1.0, 1e-9);
    const auto r = lp_support(v2(1, 1), unit_box(2));
    EXPECT_NEAR(r.value, 2.0, 1e-9);
    EXPECT_LT((r.argmax - v2(1, 1)).norm(), 1e-7);
    const auto t = lp_support(v2(1, 0), triangle());
    EXPECT_NEAR(t.value, 1.0, 1e-9);
    EXPECT_LT((t.argmax - v2(1, 0)).norm(), 1e-7);
}

TEST(LpSupport, Errors) {
    try {
        lp_support(v2(1, 0), Polyhedron::empty(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty_set");
    }
    Matrix A(1, 2);
    A << 0, 1;
    try {
        lp_support(v2(1, 0), Polyhedron(A, Vector::Ones(1)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "unbounded");
    }
}

TEST(LpSupport, RandomAgainstVertexSearch) {
    // Oracle: enumerate every pair of rows in 2-D, keep feasible intersections.
    std::mt19937 gen(42);
    for (int draw = 0; draw < 30; ++draw) {
        const Polyhedron P = random_polytope(gen, 2, 8);
        std::normal_distribution<double> g(0.0, 1.0);
        const Vector c = v2(g(gen), g(gen));
        double best = -1e300;
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < P.rows(); ++j) {
                Matrix M(2, 2);
                M << P.A().row(i), P.A().row(j);
                if (std::abs(M.determinant()) < 1e-12) {
                    continue;
                }
                Vector rhs(2);
                rhs << P.b()(i), P.b()(j);
                const Vector x = M.inverse() * rhs;
                if (P.contains_point(x, 1e-9)) {
                    best = std::max(best, c.dot(x));
                }
            }
        }
        EXPECT_NEAR(lp_support(c, P).value, best, 1e-7) << "draw " << draw;
    }
}

TEST(Intersect, Basics) {
    const Polyhedron r = intersect(interval(-1, 1), interval(0, 2));
    EXPECT_TRUE(same_set(r, interval(0, 1)));
    EXPECT_EQ(r.rows(), 2);
    const Polyhedron self = intersect(unit_box(2), unit_box(2));
    EXPECT_EQ(self.rows(), 4);
    EXPECT_TRUE(same_set(self, unit_box(2)));
}

TEST(Intersect, HalfplaneGridOracle) {
    Matrix A(1, 2);
    A << 1, 1;
    const Polyhedron half(A, Vector::Zero(1));
    const Polyhedron r = intersect(unit_box(2), half);
    // x ≤ 1 and y ≤ 1 only touch the triangle at a vertex, so they are pruned.
    EXPECT_EQ(r.rows(), 3);
    for (int i = 0; i <= 40; ++i) {
        for (int j = 0; j <= 40; ++j) {
            const Vector p = v2(-1.21 + 0.06 * i, -1.2 + 0.06 * j);
            const bool truth = std::abs(p(0)) <= 1 && std::abs(p(1)) <= 1 && p(0) + p(1) <= 0;
            EXPECT_EQ(r.contains_point(p, 1e-12), truth) << p.transpose();
        }
    }
}

TEST(AffinePreimage, Scaling) {
    const Polyhedron same = affine_preimage(Matrix::Identity(2, 2), unit_box(2));
    EXPECT_TRUE(same_set(same, unit_box(2)));
    const Polyhedron half = affine_preimage(2.0 * Matrix::Identity(1, 1), interval(-1, 1));
    EXPECT_TRUE(same_set(half, interval(-0.5, 0.5)));
}

TEST(AffinePreimage, OneStepBackwardSetOfScalarIntegrator) {
    // x⁺ = x + u with (x, v) kept and u a decision: M_e = [[1,0,1],[0,1,0]].
    // Γ₀ = {|x| ≤ 0.5, |v| ≤ 1}; W = {|x| ≤ 1, |u| ≤ 0.25}.
    Matrix Me(2, 3);
    Me << 1, 0, 1, 0, 1, 0;
    const Polyhedron gamma0 = Polyhedron::box(v2(-0.5, -1), v2(0.5, 1));
    Matrix W(4, 3);
    W << 1, 0, 0, -1, 0, 0, 0, 0, 1, 0, 0, -1;
    Vector wb(4);
    wb << 1, 1, 0.25, 0.25;
    const Polyhedron lifted = intersect(affine_preimage(Me, gamma0), Polyhedron(W, wb));
    const Polyhedron gamma1 = project_fm(lifted, {0, 1});
    // Oracle: exhaustive gridded one-step reachability.
    for (int i = 0; i <= 30; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const double x = -1.2 + 0.08 * i;
            const double v = -1.0 + 0.2 * j;
            bool reachable = false;
            for (int k = 0; k <= 1000 && !reachable; ++k) {
                const double u = -0.25 + 0.0005 * k;
                reachable = std::abs(x) <= 1 && std::abs(x + u) <= 0.5 + 1e-12;
            }
            EXPECT_EQ(gamma1.contains_point(v2(x, v), 1e-9), reachable) << x << " " << v;
        }
    }
}

TEST(ProjectFm, TriangleOntoX) {
    const Polyhedron p = project_fm(triangle(), {0});
    EXPECT_TRUE(same_set(p, interval(-1, 1)));
    EXPECT_EQ(p.rows(), 2);
    EXPECT_TRUE(same_set(project_fm(unit_box(2), {0}), interval(-1, 1)));
}

TEST(ProjectFm, KeepOrderIsRespected) {
    const Polyhedron box3 = Polyhedron::box((Vector(3) << -1, -2, -3).finished(), (Vector(3) << 1, 2, 3).finished());
    const Polyhedron p = project_fm(box3, {2, 0});
    EXPECT_TRUE(same_set(p, Polyhedron::box(v2(-3, -1), v2(3, 1))));
}

TEST(ProjectFm, AllDimsEqualsPruning) {
    std::mt19937 gen(8);
    const Polyhedron P = random_polytope(gen, 3, 20);
    const Polyhedron a = project_fm(P, {0, 1, 2});
    const Polyhedron b = remove_redundant(P);
    EXPECT_EQ(a.rows(), b.rows());
    EXPECT_TRUE(same_set(a, b));
}

TEST(ProjectFm, Blowup) {
    std::mt19937 gen(9);
    const Polyhedron P = random_polytope(gen, 3, 40);
    ProjectionOptions opt;
    opt.max_rows = 10;
    try {
        project_fm(P, {0}, opt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "projection_blowup");
    }
}

TEST(ProjectFm, MonotoneAndRoundTrip) {
    std::mt19937 gen(10);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int draw = 0; draw < 8; ++draw) {
        const Polyhedron P = random_polytope(gen, 3, 12);
        Matrix cut(1, 3);
        cut << u(gen), u(gen), u(gen);
        const Polyhedron Q = intersect(P, Polyhedron(cut, Vector::Constant(1, 0.2)));
        const Polyhedron pp = project_fm(P, {0, 2});
        const Polyhedron pq = project_fm(Q, {0, 2});
        EXPECT_TRUE(contains(pp, pq));
        // sampled points of P project into the projection
        int hits = 0;
        for (int s = 0; s < 400 && hits < 30; ++s) {
            Vector x(3);
            x << u(gen), u(gen), u(gen);
            if (P.contains_point(x, 0.0)) {
                ++hits;
                EXPECT_TRUE(pp.contains_point(v2(x(0), x(2)), 1e-9));
            }
        }
    }
}

TEST(RemoveRedundant, Basics) {
    Matrix A(2, 1);
    A << 1, 1;
    Vector b(2);
    b << 1, 2;
    const Polyhedron r = remove_redundant(Polyhedron(A, b));
    ASSERT_EQ(r.rows(), 1);
    EXPECT_DOUBLE_EQ(r.b()(0), 1.0);

    Matrix D(6, 2);
    D << 1, 0, 1, 0, -1, 0, 0, 1, 0, -1, 0, -1;
    const Polyhedron dup = remove_redundant(Polyhedron(D, Vector::Ones(6)));
    EXPECT_EQ(dup.rows(), 4);
    try {
        remove_redundant(Polyhedron::empty(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "empty_set");
    }
}

TEST(RemoveRedundant, RandomMutualContainmentAndIdempotence) {
    std::mt19937 gen(30);
    const Polyhedron P = random_polytope(gen, 2, 30);
    const Polyhedron R = remove_redundant(P);
    EXPECT_TRUE(same_set(P, R));
    EXPECT_LT(R.rows(), P.rows());
    const Polyhedron RR = remove_redundant(R);
    EXPECT_EQ(RR.rows(), R.rows());
    EXPECT_EQ(RR.A(), R.A());
    // every surviving row is essential
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
        Matrix A(R.rows() - 1, 2);
        Vector b(R.rows() - 1);
        Eigen::Index w = 0;
        for (Eigen::Index k = 0; k < R.rows(); ++k) {
            if (k != i) {
                A.row(w) = R.A().row(k);
                b(w++) = R.b()(k);
            }
        }
        const auto s = support(R.A().row(i).transpose(), Polyhedron(A, b));
        if (s.status == LpStatus::optimal) {
            EXPECT_GT(s.value, R.b()(i) - 1e-7);
        }
    }
}

TEST(Contains, Basics) {
    EXPECT_TRUE(contains(unit_box(2), unit_box(2)));
    EXPECT_TRUE(contains(interval(-1, 1), interval(-0.5, 0.5)));
    EXPECT_FALSE(contains(interval(-0.5, 0.5), interval(-1, 1)));
    Matrix A(1, 1);
    A << 1;
    try {
        contains(interval(-1, 1), Polyhedron(A, Vector::Ones(1)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "unbounded");
    }
}

TEST(StrictContains, Basics) {
    EXPECT_TRUE(strict_contains(interval(-1, 1), interval(-0.5, 0.5), 0.4));
    EXPECT_FALSE(strict_contains(interval(-1, 1), interval(-0.5, 0.5), 0.6));
    EXPECT_FALSE(strict_contains(unit_box(2), unit_box(2), 1e-9));
}

TEST(Slice, Box) {
    const Polyhedron s = slice(unit_box(2), Vector::Zero(1));
    EXPECT_TRUE(same_set(s, interval(-1, 1)));
    const Polyhedron e = slice(unit_box(2), Vector::Constant(1, 2.0));
    EXPECT_TRUE(is_empty(e));
}

TEST(PolyFile, RoundTripBitExact) {
    std::mt19937 gen(3);
    const Polyhedron P = remove_redundant(random_polytope(gen, 3, 10));
    const std::string text = to_poly_string(P, "nx=2 nv=1");
    std::string comment;
    const Polyhedron Q = parse_poly(text, &comment);
    EXPECT_EQ(comment, "nx=2 nv=1");
    EXPECT_TRUE((Q.A().array() == P.A().array()).all());
    EXPECT_TRUE((Q.b().array() == P.b().array()).all());
    EXPECT_EQ(to_poly_string(Q, "nx=2 nv=1"), text);
    EXPECT_THROW(parse_poly("2 1\n1 1\n"), Error);
}
