#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "feasgov/error.hpp"

namespace feasgov {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Shortest decimal that parses back to exactly `value`.
inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) {
        throw Error("format_error", "cannot format double");
    }
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view token) {
    // std::from_chars rejects a leading '+', strip it for convenience.
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw Error("parse_error", "not a number: '" + std::string(token) + "'");
    }
    return value;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Parses the matrix text format: rows separated by ';', entries by whitespace.
/// An empty string yields a 0x0 matrix.
inline Matrix parse_matrix(std::string_view text) {
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t stop = text.find(';', start);
        if (stop == std::string_view::npos) {
            stop = text.size();
        }
        std::istringstream row_stream{std::string(text.substr(start, stop - start))};
        std::vector<double> row;
        std::string token;
        while (row_stream >> token) {
            row.push_back(parse_double(token));
        }
        if (!row.empty()) {
            rows.push_back(std::move(row));
        }
        start = stop + 1;
    }
    if (rows.empty()) {
        return Matrix(0, 0);
    }
    const auto cols = rows.front().size();
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw Error("parse_error", "ragged matrix literal");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    if (!m.allFinite()) {
        throw Error("parse_error", "non-finite matrix entry");
    }
    return m;
}

inline std::string format_matrix(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i > 0) {
            out += "; ";
        }
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) {
                out += ' ';
            }
            out += format_double(m(i, j));
        }
    }
    return out;
}

inline double spectral_radius(const Matrix& a) {
    if (a.rows() == 0) {
        return 0.0;
    }
    return Eigen::EigenSolver<Matrix>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Numerical rank with threshold tol * largest singular value.
inline Eigen::Index numerical_rank(const Matrix& m, double rel_tol = tolerances().rank) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    return (s.array() > rel_tol * s(0)).count();
}

struct DareSolution {
    Matrix P;
    Matrix K;
    int iterations = 0;
};

/// Discrete algebraic Riccati equation
///   P = Q + AᵀPA − AᵀPB (R + BᵀPB)⁻¹ BᵀPA
/// solved by fixed-point iteration of the Riccati map starting from P = Q.
/// Returns P and the LQR gain K = (R + BᵀPB)⁻¹BᵀPA.
inline DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                               int max_iter = 10000, double tol = 1e-12) {
    const auto n = A.rows();
    const auto m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m ||
        R.cols() != m) {
        throw Error("dimension_mismatch", "solve_dare");
    }
    if (!A.allFinite() || !B.allFinite() || !Q.allFinite() || !R.allFinite()) {
        throw Error("non_finite", "solve_dare");
    }
    const Matrix Rs = 0.5 * (R + R.transpose());
    if ((R - Rs).norm() > 1e-10 * std::max(1.0, R.norm()) || Rs.llt().info() != Eigen::Success) {
        throw Error("invalid_weights", "R must be symmetric positive definite");
    }
    const Matrix Qs = 0.5 * (Q + Q.transpose());
    if ((Q - Qs).norm() > 1e-10 * std::max(1.0, Q.norm()) ||
        Eigen::SelfAdjointEigenSolver<Matrix>(Qs).eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.norm())) {
        throw Error("invalid_weights", "Q must be symmetric positive semidefinite");
    }

    Matrix P = Qs;
    for (int it = 1; it <= max_iter; ++it) {
        const Matrix BtP = B.transpose() * P;
        const Matrix S = Rs + BtP * B;
        const Matrix K = S.llt().solve(BtP * A);
        Matrix next = Qs + A.transpose() * P * A - (BtP * A).transpose() * K;
        next = 0.5 * (next + next.transpose());
        if (!next.allFinite()) {
            break;
        }
        const double delta = (next - P).norm();
        P = std::move(next);
        if (delta <= tol * std::max(1.0, P.norm())) {
            const Matrix BtPf = B.transpose() * P;
            Matrix Kf = (Rs + BtPf * B).llt().solve(BtPf * A);
            if (spectral_radius(A - B * Kf) >= 1.0) {
                break;
            }
            return {P, std::move(Kf), it};
        }
    }
    throw Error("dare_diverged", "Riccati iteration did not converge");
}

inline double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                            const Matrix& P) {
    const Matrix BtPA = B.transpose() * P * A;
    const Matrix S = R + B.transpose() * P * B;
    const Matrix rhs = Q + A.transpose() * P * A - BtPA.transpose() * S.llt().solve(BtPA);
    return (P - rhs).norm();
}

/// Solves ĀᵀPĀ − P + S = 0 for Schur Ā via the Kronecker-vectorized linear system.
inline Matrix solve_discrete_lyapunov(const Matrix& Abar, const Matrix& S) {
    const auto n = Abar.rows();
    if (Abar.cols() != n || S.rows() != n || S.cols() != n) {
        throw Error("dimension_mismatch", "solve_discrete_lyapunov");
    }
    if (spectral_radius(Abar) >= 1.0) {
        throw Error("not_schur", "closed-loop matrix has spectral radius >= 1");
    }
    // vec(ĀᵀPĀ) = (Āᵀ ⊗ Āᵀ) vec(P) for column-major vec.
    const auto n2 = n * n;
    Matrix lhs = Matrix::Identity(n2, n2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            lhs.block(i * n, j * n, n, n) -= Abar(j, i) * Abar.transpose();
        }
    }
    const Vector rhs = Eigen::Map<const Vector>(S.data(), n2);
    const Vector p = lhs.partialPivLu().solve(rhs);
    Matrix P = Eigen::Map<const Matrix>(p.data(), n, n);
    return 0.5 * (P + P.transpose());
}

/// Orthonormal basis (as columns) of ker Z. Rank threshold is 1e-10 · ‖Z‖₂.
inline Matrix kernel_basis(const Matrix& Z) {
    if (!Z.allFinite()) {
        throw Error("non_finite", "kernel_basis");
    }
    const auto q = Z.cols();
    Eigen::Index rank = 0;
    Matrix V;
    if (Z.rows() == 0) {
        V = Matrix::Identity(q, q);
    } else {
        // Pad to a square system so that the full V is always available.
        Matrix padded = Matrix::Zero(std::max(Z.rows(), q), q);
        padded.topRows(Z.rows()) = Z;
        Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        const double thresh = tolerances().rank * (s.size() > 0 ? s(0) : 0.0);
        rank = s(0) > 0.0 ? (s.array() > thresh).count() : 0;
        V = svd.matrixV();
    }
    const auto d = q - rank;
    if (d == 0) {
        throw Error("trivial_kernel", "ker Z = {0}");
    }
    Matrix G = V.rightCols(d);
    // Deterministic orientation: largest-magnitude entry of each column positive.
    for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::Index imax = 0;
        G.col(j).cwiseAbs().maxCoeff(&imax);
        if (G(imax, j) < 0.0) {
            G.col(j) = -G.col(j);
        }
    }
    return G;
}

/// Zero-order-hold discretization via the exponential of [[Ac, Bc], [0, 0]]·ts.
inline std::pair<Matrix, Matrix> zoh_discretize(const Matrix& Ac, const Matrix& Bc, double ts) {
    const auto n = Ac.rows();
    const auto m = Bc.cols();
    if (Ac.cols() != n || Bc.rows() != n) {
        throw Error("dimension_mismatch", "zoh_discretize");
    }
    if (!(ts > 0.0) || !std::isfinite(ts)) {
        throw Error("invalid_argument", "sampling time must be positive");
    }
    if (!Ac.allFinite() || !Bc.allFinite()) {
        throw Error("non_finite", "zoh_discretize");
    }
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = Ac * ts;
    aug.topRightCorner(n, m) = Bc * ts;
    const Matrix e = aug.exp();
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

/// Kronecker product I_k ⊗ M.
inline Matrix kron_identity(Eigen::Index k, const Matrix& M) {
    Matrix out = Matrix::Zero(k * M.rows(), k * M.cols());
    for (Eigen::Index i = 0; i < k; ++i) {
        out.block(i * M.rows(), i * M.cols(), M.rows(), M.cols()) = M;
    }
    return out;
}

/// Vertical stack 1_k ⊗ M.
inline Matrix repeat_rows(Eigen::Index k, const Matrix& M) {
    Matrix out(k * M.rows(), M.cols());
    for (Eigen::Index i = 0; i < k; ++i) {
        out.middleRows(i * M.rows(), M.rows()) = M;
    }
    return out;
}

}  // namespace feasgov
