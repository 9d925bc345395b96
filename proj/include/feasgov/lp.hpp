#pragma once

// Dense LP kernels for the set calculus, all of the form
//     maximize cᵀx   subject to   Ax ≤ b
// with a handful of columns and possibly many rows. The active-set walk keeps
// a linearly independent working set, moves along the projected objective and
// drops rows with negative multipliers (lowest index first).

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "feasgov/numerics.hpp"

namespace feasgov::detail {

enum class LpOutcome { optimal, unbounded, iteration_limit };

struct LpPoint {
    LpOutcome outcome = LpOutcome::optimal;
    double value = 0.0;
    Vector x;
    Vector ray;  // improving direction when unbounded
};

/// `x0` must satisfy Ax ≤ b up to rounding; negative slacks are treated as 0.
inline LpPoint active_set_lp(const Vector& c, const Matrix& A, const Vector& b, const Vector& x0,
                             int max_iter = 0) {
    const auto n = A.cols();
    const auto m = A.rows();
    if (max_iter <= 0) {
        max_iter = static_cast<int>(20 * (m + n) + 100);
    }
    LpPoint res;
    res.x = x0;
    const double cn = c.norm();
    if (cn == 0.0) {
        res.value = 0.0;
        return res;
    }
    std::vector<Eigen::Index> work;
    std::vector<char> in_work(static_cast<std::size_t>(m), 0);
    Vector Ax = A * res.x;
    for (int it = 0; it < max_iter; ++it) {
        const auto k = static_cast<Eigen::Index>(work.size());
        Vector p = c;
        Eigen::HouseholderQR<Matrix> qr;
        if (k > 0) {
            Matrix Aw(n, k);
            for (Eigen::Index j = 0; j < k; ++j) {
                Aw.col(j) = A.row(work[static_cast<std::size_t>(j)]).transpose();
            }
            qr.compute(Aw);
            const Matrix Q = qr.householderQ();
            const Matrix Z = Q.rightCols(n - k);
            p = Z * (Z.transpose() * c);
        }
        // Null-space bases of nearly dependent working rows carry errors far
        // above machine precision; smaller directions are treated as zero.
        if (p.norm() > 1e-9 * cn) {
            // Ratio test, lowest index on ties.
            const Vector Ap = A * p;
            const double pn = p.norm();
            Eigen::Index enter = -1;
            double tmin = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                if (in_work[static_cast<std::size_t>(i)] || Ap(i) <= 1e-12 * pn) {
                    continue;
                }
                const double t = std::max(b(i) - Ax(i), 0.0) / Ap(i);
                if (t < tmin) {
                    tmin = t;
                    enter = i;
                }
            }
            if (enter < 0) {
                res.outcome = LpOutcome::unbounded;
                res.ray = p;
                res.value = std::numeric_limits<double>::infinity();
                return res;
            }
            res.x += tmin * p;
            Ax += tmin * Ap;
            work.push_back(enter);
            in_work[static_cast<std::size_t>(enter)] = 1;
            continue;
        }
        // c lies in the span of the working rows: check multipliers.
        const Vector y = qr.solve(c);
        Eigen::Index drop = -1;
        Eigen::Index drop_row = std::numeric_limits<Eigen::Index>::max();
        for (Eigen::Index j = 0; j < k; ++j) {
            if (y(j) < -1e-12 * cn && work[static_cast<std::size_t>(j)] < drop_row) {
                drop = j;
                drop_row = work[static_cast<std::size_t>(j)];
            }
        }
        if (drop < 0) {
            res.value = c.dot(res.x);
            return res;
        }
        in_work[static_cast<std::size_t>(drop_row)] = 0;
        work.erase(work.begin() + drop);
    }
    res.outcome = LpOutcome::iteration_limit;
    res.value = c.dot(res.x);
    return res;
}

struct Chebyshev {
    Vector center;
    double radius = 0.0;  // negative when the rows are inconsistent
};

/// Largest ball {x : ‖x − center‖ ≤ radius} inside {Ax ≤ b}, radius capped at
/// `cap`. Started from the origin with radius min bᵢ/‖aᵢ‖, which is feasible.
inline Chebyshev chebyshev_center(const Matrix& A, const Vector& b, double cap = 1.0) {
    const auto n = A.cols();
    const auto m = A.rows();
    Chebyshev out;
    if (m == 0) {
        out.center = Vector::Zero(n);
        out.radius = cap;
        return out;
    }
    Matrix Ac(m + 1, n + 1);
    Vector bc(m + 1);
    Ac.topLeftCorner(m, n) = A;
    Ac.block(0, n, m, 1) = A.rowwise().norm();
    Ac.row(m).setZero();
    Ac(m, n) = 1.0;
    bc.head(m) = b;
    bc(m) = cap;
    Vector x0 = Vector::Zero(n + 1);
    double t0 = cap;
    for (Eigen::Index i = 0; i < m; ++i) {
        t0 = std::min(t0, b(i) / Ac(i, n));
    }
    x0(n) = t0;
    Vector c = Vector::Zero(n + 1);
    c(n) = 1.0;
    const LpPoint r = active_set_lp(c, Ac, bc, x0);
    out.center = r.x.head(n);
    out.radius = r.x(n);
    return out;
}

/// Orthonormal basis of the row space of A; its complement is the lineality
/// space of every nonempty {Ax ≤ b}.
inline Matrix row_space_basis(const Matrix& A) {
    const auto n = A.cols();
    if (A.rows() == 0) {
        return Matrix(n, 0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A);
    const Vector& ev = es.eigenvalues();  // ascending
    const double top = std::max(ev(n - 1), 1e-300);
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        // singular values below 1e-8 of the largest count as zero
        if (ev(j) > 1e-16 * top) {
            ++r;
        }
    }
    return es.eigenvectors().rightCols(r);
}

/// Random unit vector from a fixed-seed stream (tie-breaking perturbations).
inline Vector jitter_direction(Eigen::Index n, std::mt19937& gen) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = g(gen);
    }
    return v / std::max(v.norm(), 1e-300);
}

/// First row crossed by the ray z0 + t·dir, t > 0, given slacks b − Az0, among
/// rows with `eligible[i]`. Returns −1 when no row blocks the ray, −2 when the first
/// crossing is shared by several rows.
inline Eigen::Index ray_shoot(const Matrix& A, const Vector& slack0, const Vector& dir,
                              const std::vector<char>& eligible) {
    const Vector Ad = A * dir;
    const double dn = dir.norm();
    double tmin = std::numeric_limits<double>::infinity();
    Eigen::Index best = -1;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (!eligible[static_cast<std::size_t>(i)] || Ad(i) <= 1e-14 * dn) {
            continue;
        }
        const double t = slack0(i) / Ad(i);
        if (t < tmin) {
            tmin = t;
            best = i;
        }
    }
    if (best < 0) {
        return -1;
    }
    const double band = 1e-9 * std::max(tmin, 1e-300);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (i == best || !eligible[static_cast<std::size_t>(i)] || Ad(i) <= 1e-14 * dn) {
            continue;
        }
        if (slack0(i) / Ad(i) <= tmin + band) {
            return -2;
        }
    }
    return best;
}

/// Clarkson's redundancy detection for a full-dimensional {Ax ≤ b} with unit
/// rows and interior point z0 (slacks bounded away from 0). Rows are visited in
/// `order`; each is tested against the facets found so far and, when it is not
/// implied, a ray from z0 discovers a new facet.
inline std::vector<char> clarkson_facets(const Matrix& A, const Vector& b, const Vector& z0,
                                         const std::vector<Eigen::Index>& order, double tol) {
    const auto m = A.rows();
    const auto n = A.cols();
    std::vector<char> facet(static_cast<std::size_t>(m), 0);
    std::vector<char> eligible(static_cast<std::size_t>(m), 1);
    std::vector<Eigen::Index> S;
    const Vector slack0 = b - A * z0;
    std::mt19937 gen(12345);
    Matrix As(0, n);
    Vector bs(0);
    for (const auto i : order) {
        if (facet[static_cast<std::size_t>(i)] || !eligible[static_cast<std::size_t>(i)]) {
            continue;
        }
        for (;;) {
            const auto k = static_cast<Eigen::Index>(S.size());
            Matrix Acap(k + 1, n);
            Vector bcap(k + 1);
            Acap.topRows(k) = As;
            bcap.head(k) = bs;
            Acap.row(k) = A.row(i);
            bcap(k) = b(i) + 1.0;
            const LpPoint r = active_set_lp(A.row(i).transpose(), Acap, bcap, z0);
            if (r.outcome == LpOutcome::optimal && r.value <= b(i) + tol) {
                eligible[static_cast<std::size_t>(i)] = 0;
                break;
            }
            Vector dir = r.x - z0;
            // The unperturbed ray never meets a known facet before row i; a
            // perturbed one might, which counts as a failed attempt.
            auto shoot = [&](const Vector& d) {
                const Eigen::Index h = ray_shoot(A, slack0, d, eligible);
                return h >= 0 && facet[static_cast<std::size_t>(h)] ? Eigen::Index{-2} : h;
            };
            Eigen::Index hit = shoot(dir);
            for (int attempt = 0; hit == -2 && attempt < 20; ++attempt) {
                hit = shoot(dir + 1e-3 * dir.norm() * jitter_direction(n, gen));
            }
            if (hit < 0) {
                // Degenerate geometry: keep the row itself.
                hit = i;
            }
            facet[static_cast<std::size_t>(hit)] = 1;
            S.push_back(hit);
            As.conservativeResize(k + 1, n);
            bs.conservativeResize(k + 1);
            As.row(k) = A.row(hit);
            bs(k) = b(hit);
            if (hit == i) {
                break;
            }
        }
    }
    return facet;
}

}  // namespace feasgov::detail
