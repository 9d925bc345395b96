#pragma once

// Dense strictly convex QP
//     minimize ½ zᵀHz + fᵀz   subject to   Az ≤ b
// solved with the Goldfarb–Idnani dual active-set method. The working set is
// kept in factored form (J = L⁻ᵀQ, upper-triangular R) and updated with Givens
// rotations when constraints enter or leave.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "feasgov/error.hpp"
#include "feasgov/numerics.hpp"

namespace feasgov {

struct QpProblem {
    Matrix H;
    Vector f;
    Matrix A;
    Vector b;

    [[nodiscard]] Eigen::Index dim() const { return H.rows(); }
    [[nodiscard]] Eigen::Index rows() const { return A.rows(); }
};

enum class QpStatus { optimal, infeasible, max_iter };

inline const char* to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal: return "optimal";
        case QpStatus::infeasible: return "infeasible";
        case QpStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

struct QpSolution {
    Vector z;
    Vector lambda;
    QpStatus status = QpStatus::infeasible;
    int iterations = 0;
    double kkt_residual = std::numeric_limits<double>::infinity();
    std::vector<int> active_set;  // rows in the final working set, in entry order

    [[nodiscard]] bool optimal() const { return status == QpStatus::optimal; }
    [[nodiscard]] double objective(const QpProblem& p) const { return 0.5 * z.dot(p.H * z) + p.f.dot(z); }
};

struct QpOptions {
    int max_iter = 0;  // 0 selects 10·(d + m)
    bool polish = true;
};

/// Largest of stationarity, primal infeasibility, dual infeasibility and
/// complementarity violations.
inline double kkt_residual(const QpProblem& p, const Vector& z, const Vector& lambda) {
    double res = (p.H * z + p.f + p.A.transpose() * lambda).lpNorm<Eigen::Infinity>();
    if (p.rows() > 0) {
        const Vector viol = p.A * z - p.b;
        res = std::max(res, viol.maxCoeff());
        res = std::max(res, (-lambda).maxCoeff());
        res = std::max(res, (lambda.array() * viol.array()).abs().maxCoeff());
    }
    return std::max(res, 0.0);
}

namespace detail {

class DualActiveSet {
public:
    DualActiveSet(const QpProblem& p, const QpOptions& opt) : p_(p), opt_(opt) {
        d_ = p.dim();
        m_ = p.rows();
        if (p.H.cols() != d_ || p.f.size() != d_ || p.A.cols() != d_ || p.b.size() != m_) {
            throw Error("dimension_mismatch", "solve_qp");
        }
        max_iter_ = opt.max_iter > 0 ? opt.max_iter : static_cast<int>(10 * (d_ + m_));
    }

    QpSolution run(const std::vector<int>* warm) {
        // Progressive Tikhonov bump for numerically singular systems.
        static constexpr double bumps[] = {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8};
        const double scale = std::max(1.0, p_.H.cwiseAbs().maxCoeff());
        for (double bump : bumps) {
            if (!factor(bump * scale)) {
                continue;
            }
            auto sol = iterate(warm);
            if (sol) {
                return *sol;
            }
        }
        throw Error("ill_conditioned", "working-set system singular after regularization");
    }

private:
    bool factor(double bump) {
        Matrix H = 0.5 * (p_.H + p_.H.transpose());
        H.diagonal().array() += bump;
        llt_.compute(H);
        if (llt_.info() != Eigen::Success) {
            return false;
        }
        const Matrix L = llt_.matrixL();
        if (!(L.diagonal().minCoeff() > 0.0)) {
            return false;
        }
        h_ = std::move(H);
        J0_ = L.transpose().triangularView<Eigen::Upper>().solve(Matrix::Identity(d_, d_));
        return true;
    }

    void reset() {
        J_ = J0_;
        R_ = Matrix::Zero(d_, d_);
        active_.clear();
        u_.clear();
        r_norm_ = 1.0;
        x_ = llt_.solve(-p_.f);
    }

    // Compute d = Jᵀn, z = J₂d₂ and r = R⁻¹d₁ for the current working set.
    void directions(const Vector& np, Vector& d, Vector& z, Vector& r) const {
        const auto iq = static_cast<Eigen::Index>(active_.size());
        d = J_.transpose() * np;
        z = J_.rightCols(d_ - iq) * d.tail(d_ - iq);
        if (iq > 0) {
            r = R_.topLeftCorner(iq, iq).triangularView<Eigen::Upper>().solve(d.head(iq));
        } else {
            r.resize(0);
        }
    }

    // Givens sweep that folds d into the factorization; false on dependence.
    bool add_constraint(Vector d) {
        const auto iq = static_cast<Eigen::Index>(active_.size());
        for (Eigen::Index j = d_ - 1; j >= iq + 1; --j) {
            double cc = d(j - 1);
            double ss = d(j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) {
                continue;
            }
            d(j) = 0.0;
            ss /= h;
            cc /= h;
            if (cc < 0.0) {
                cc = -cc;
                ss = -ss;
                d(j - 1) = -h;
            } else {
                d(j - 1) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Eigen::Index k = 0; k < d_; ++k) {
                const double t1 = J_(k, j - 1);
                const double t2 = J_(k, j);
                J_(k, j - 1) = t1 * cc + t2 * ss;
                J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
            }
        }
        R_.col(iq).head(iq + 1) = d.head(iq + 1);
        if (std::abs(d(iq)) <= std::numeric_limits<double>::epsilon() * r_norm_) {
            return false;
        }
        r_norm_ = std::max(r_norm_, std::abs(d(iq)));
        return true;
    }

    void delete_constraint(std::size_t pos) {
        auto iq = static_cast<Eigen::Index>(active_.size());
        const auto qq = static_cast<Eigen::Index>(pos);
        for (Eigen::Index i = qq; i < iq - 1; ++i) {
            R_.col(i) = R_.col(i + 1);
        }
        R_.col(iq - 1).setZero();
        active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pos));
        u_.erase(u_.begin() + static_cast<std::ptrdiff_t>(pos));
        --iq;
        for (Eigen::Index j = qq; j < iq; ++j) {
            double cc = R_(j, j);
            double ss = R_(j + 1, j);
            const double h = std::hypot(cc, ss);
            if (h == 0.0) {
                continue;
            }
            cc /= h;
            ss /= h;
            R_(j + 1, j) = 0.0;
            if (cc < 0.0) {
                R_(j, j) = -h;
                cc = -cc;
                ss = -ss;
            } else {
                R_(j, j) = h;
            }
            const double xny = ss / (1.0 + cc);
            for (Eigen::Index k = j + 1; k < iq; ++k) {
                const double t1 = R_(j, k);
                const double t2 = R_(j + 1, k);
                R_(j, k) = t1 * cc + t2 * ss;
                R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
            }
            for (Eigen::Index k = 0; k < d_; ++k) {
                const double t1 = J_(k, j);
                const double t2 = J_(k, j + 1);
                J_(k, j) = t1 * cc + t2 * ss;
                J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
            }
        }
    }

    // Equality-constrained solve on `set` (null-space method). Returns false if
    // the active normals are numerically dependent.
    bool equality_solve(const std::vector<int>& set, Vector& x, Vector& lambda) const {
        const auto k = static_cast<Eigen::Index>(set.size());
        if (k == 0) {
            x = llt_.solve(-p_.f);
            lambda.resize(0);
            return true;
        }
        if (k > d_) {
            return false;
        }
        Matrix At(d_, k);
        Vector bw(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            At.col(i) = p_.A.row(set[static_cast<std::size_t>(i)]).transpose();
            bw(i) = p_.b(set[static_cast<std::size_t>(i)]);
        }
        Eigen::HouseholderQR<Matrix> qr(At);
        const Matrix Qf = qr.householderQ();
        const Matrix R1 = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        const Vector rd = R1.diagonal().cwiseAbs();
        if (rd.minCoeff() <= 1e-12 * std::max(1.0, rd.maxCoeff())) {
            return false;
        }
        const Matrix Y = Qf.leftCols(k);
        const Vector zp = Y * R1.transpose().triangularView<Eigen::Lower>().solve(bw);
        x = zp;
        if (k < d_) {
            const Matrix Nm = Qf.rightCols(d_ - k);
            const Matrix reduced = Nm.transpose() * h_ * Nm;
            const Vector w = reduced.llt().solve(-Nm.transpose() * (h_ * zp + p_.f));
            x += Nm * w;
        }
        const Vector g = -(h_ * x + p_.f);
        lambda = R1.triangularView<Eigen::Upper>().solve(Y.transpose() * g);
        return x.allFinite() && lambda.allFinite();
    }

    // Warm start: load the hinted rows as a dual-feasible working set.
    int warm_start(const std::vector<int>& hint) {
        std::vector<int> set;
        for (int i : hint) {
            if (i >= 0 && i < m_ && std::find(set.begin(), set.end(), i) == set.end()) {
                set.push_back(i);
            }
        }
        int adds = 0;
        for (;;) {
            reset();
            std::vector<int> kept;
            Vector d, z, r;
            for (int i : set) {
                const Vector np = -p_.A.row(i).transpose();
                directions(np, d, z, r);
                const auto iq = static_cast<Eigen::Index>(active_.size());
                if (d.tail(d_ - iq).squaredNorm() <= 1e-14 * std::max(d.squaredNorm(), 1e-300)) {
                    continue;
                }
                if (!add_constraint(d)) {
                    continue;
                }
                active_.push_back(i);
                u_.push_back(0.0);
                kept.push_back(i);
                ++adds;
            }
            if (kept.empty()) {
                reset();
                return adds;
            }
            Vector x, lambda;
            if (!equality_solve(kept, x, lambda)) {
                reset();
                return adds;
            }
            Eigen::Index worst = -1;
            double worst_val = -opt_tol();
            for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                if (lambda(i) < worst_val) {
                    worst_val = lambda(i);
                    worst = i;
                }
            }
            if (worst < 0) {
                x_ = x;
                for (Eigen::Index i = 0; i < lambda.size(); ++i) {
                    u_[static_cast<std::size_t>(i)] = std::max(0.0, lambda(i));
                }
                return adds;
            }
            kept.erase(kept.begin() + worst);
            set = kept;
        }
    }

    [[nodiscard]] double viol_tol() const { return 1e-2 * tolerances().feas; }
    [[nodiscard]] double opt_tol() const { return tolerances().opt; }

    std::optional<QpSolution> iterate(const std::vector<int>* warm) {
        int iterations = 0;
        if (warm != nullptr && !warm->empty()) {
            iterations += warm_start(*warm);
        } else {
            reset();
        }
        const double inf = std::numeric_limits<double>::infinity();
        Vector d, z, r;
        std::vector<char> is_active(static_cast<std::size_t>(m_), 0);
        for (int i : active_) {
            is_active[static_cast<std::size_t>(i)] = 1;
        }
        for (;;) {
            // Step 1: pick the most violated constraint (lowest index on ties).
            int p = -1;
            double sp = -viol_tol();
            if (m_ > 0) {
                const Vector s = p_.b - p_.A * x_;
                for (Eigen::Index i = 0; i < m_; ++i) {
                    if (!is_active[static_cast<std::size_t>(i)] && s(i) < sp) {
                        sp = s(i);
                        p = static_cast<int>(i);
                    }
                }
            }
            if (p < 0) {
                return finish(QpStatus::optimal, iterations);
            }
            const Vector np = -p_.A.row(p).transpose();
            double up = 0.0;
            // Step 2: move along primal/dual directions until p becomes active.
            for (;;) {
                if (++iterations > max_iter_) {
                    return finish(QpStatus::max_iter, iterations - 1);
                }
                directions(np, d, z, r);
                const auto iq = static_cast<Eigen::Index>(active_.size());
                const double curvature = d.tail(d_ - iq).squaredNorm();
                const bool z_zero = curvature <= 1e-14 * std::max(d.squaredNorm(), 1e-300);

                double t1 = inf;
                std::size_t l = 0;
                for (Eigen::Index j = 0; j < iq; ++j) {
                    if (r(j) > 0.0) {
                        const double ratio = u_[static_cast<std::size_t>(j)] / r(j);
                        if (ratio < t1) {
                            t1 = ratio;
                            l = static_cast<std::size_t>(j);
                        }
                    }
                }
                const double t2 = z_zero ? inf : -sp / z.dot(np);

                if (t1 == inf && t2 == inf) {
                    return finish(QpStatus::infeasible, iterations);
                }
                if (t2 == inf) {
                    // Partial dual step only.
                    for (Eigen::Index j = 0; j < iq; ++j) {
                        u_[static_cast<std::size_t>(j)] -= t1 * r(j);
                    }
                    up += t1;
                    is_active[static_cast<std::size_t>(active_[l])] = 0;
                    delete_constraint(l);
                    continue;
                }
                const double t = std::min(t1, t2);
                x_ += t * z;
                for (Eigen::Index j = 0; j < iq; ++j) {
                    u_[static_cast<std::size_t>(j)] -= t * r(j);
                }
                up += t;
                if (t2 <= t1) {
                    if (!add_constraint(d)) {
                        return std::nullopt;
                    }
                    active_.push_back(p);
                    u_.push_back(up);
                    is_active[static_cast<std::size_t>(p)] = 1;
                    break;
                }
                is_active[static_cast<std::size_t>(active_[l])] = 0;
                delete_constraint(l);
                sp = p_.b(p) - p_.A.row(p).dot(x_);
            }
        }
    }

    QpSolution finish(QpStatus status, int iterations) {
        QpSolution sol;
        sol.status = status;
        sol.iterations = iterations;
        sol.z = x_;
        sol.lambda = Vector::Zero(m_);
        for (std::size_t j = 0; j < active_.size(); ++j) {
            sol.lambda(active_[j]) = std::max(0.0, u_[j]);
        }
        sol.active_set = active_;
        if (status == QpStatus::optimal && opt_.polish && !active_.empty()) {
            polish(sol);
        }
        if (status == QpStatus::optimal) {
            sol.kkt_residual = kkt_residual(p_, sol.z, sol.lambda);
        } else if (status == QpStatus::max_iter) {
            sol.kkt_residual = kkt_residual(p_, sol.z, sol.lambda);
        }
        return sol;
    }

    // Recompute the iterate from the final working set with an orthogonal
    // factorization; removes the drift accumulated by long update sequences.
    void polish(QpSolution& sol) const {
        Vector x, lambda;
        if (!equality_solve(active_, x, lambda)) {
            return;
        }
        if (lambda.size() > 0 && lambda.minCoeff() < -opt_tol()) {
            return;
        }
        Vector full = Vector::Zero(m_);
        for (std::size_t j = 0; j < active_.size(); ++j) {
            full(active_[j]) = std::max(0.0, lambda(static_cast<Eigen::Index>(j)));
        }
        const QpProblem hp{h_, p_.f, p_.A, p_.b};
        if (kkt_residual(hp, x, full) <= kkt_residual(hp, sol.z, sol.lambda)) {
            sol.z = x;
            sol.lambda = full;
        }
    }

    const QpProblem& p_;
    QpOptions opt_;
    Eigen::Index d_ = 0;
    Eigen::Index m_ = 0;
    int max_iter_ = 0;
    Matrix h_;
    Eigen::LLT<Matrix> llt_;
    Matrix J0_;
    Matrix J_;
    Matrix R_;
    std::vector<int> active_;
    std::vector<double> u_;
    double r_norm_ = 1.0;
    Vector x_;
};

}  // namespace detail

/// Solves the QP. `warm_start` is an optional list of row indices expected to
/// be active at the optimum.
inline QpSolution solve_qp(const QpProblem& problem, const std::vector<int>* warm_start = nullptr,
                           const QpOptions& options = {}) {
    if (!problem.H.allFinite() || !problem.f.allFinite() || !problem.A.allFinite() ||
        !problem.b.allFinite()) {
        throw Error("non_finite", "solve_qp");
    }
    detail::DualActiveSet solver(problem, options);
    return solver.run(warm_start);
}

struct Phase1Result {
    bool feasible = false;
    Vector witness;
    double slack = 0.0;
};

/// Feasibility of {z : Az ≤ b} via
///   minimize ½ρ‖z‖² + ½s² + s   subject to   Az − s·1 ≤ b,  s ≥ 0,
/// declared feasible when the optimal s ≤ 1e-7.
inline Phase1Result feasibility_phase1(const Matrix& A, const Vector& b) {
    const auto m = A.rows();
    const auto d = A.cols();
    const double rho = tolerances().lp_reg;
    QpProblem p;
    p.H = Matrix::Identity(d + 1, d + 1) * rho;
    p.H(d, d) = 1.0;
    p.f = Vector::Zero(d + 1);
    p.f(d) = 1.0;
    p.A = Matrix::Zero(m + 1, d + 1);
    p.A.topLeftCorner(m, d) = A;
    p.A.block(0, d, m, 1).setConstant(-1.0);
    p.A(m, d) = -1.0;
    p.b = Vector::Zero(m + 1);
    p.b.head(m) = b;
    const QpSolution sol = solve_qp(p);
    Phase1Result res;
    res.witness = sol.z.head(d);
    res.slack = sol.z(d);
    res.feasible = sol.status == QpStatus::optimal && res.slack <= tolerances().lp;
    return res;
}

}  // namespace feasgov
