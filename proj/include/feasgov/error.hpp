#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace feasgov {

/// Exception carrying a stable machine-readable code (e.g. "dare_diverged")
/// next to the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    explicit Error(std::string code) : std::runtime_error(code), code_(std::move(code)) {}

    [[nodiscard]] const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Every numerical threshold of the stack lives here so a single knob can
/// loosen or tighten all of them (environment variable FEASGOV_TOL_SCALE).
struct Tolerances {
    double feas = 1e-8;        // primal feasibility of QP solutions
    double opt = 1e-8;         // stationarity / complementarity
    double lp = 1e-7;          // LP optimal value
    double redundancy = 1e-9;  // slack below which a row is declared redundant
    double containment = 1e-6; // set containment checks
    double rank = 1e-10;       // relative rank decisions
    double lp_reg = 1e-9;      // quadratic regularizer of LP / phase-1 subproblems

    [[nodiscard]] Tolerances scaled(double s) const {
        Tolerances t = *this;
        t.feas *= s;
        t.opt *= s;
        t.lp *= s;
        t.redundancy *= s;
        t.containment *= s;
        t.rank *= s;
        return t;
    }
};

inline double tolerance_scale_from_env() {
    const char* env = std::getenv("FEASGOV_TOL_SCALE");
    if (env == nullptr || *env == '\0') {
        return 1.0;
    }
    char* end = nullptr;
    const double s = std::strtod(env, &end);
    if (end == env || !(s > 0.0)) {
        throw Error("invalid_config", "FEASGOV_TOL_SCALE must be a positive number");
    }
    return s;
}

/// Process-wide tolerances, read once.
inline const Tolerances& tolerances() {
    static const Tolerances tol = Tolerances{}.scaled(tolerance_scale_from_env());
    return tol;
}

}  // namespace feasgov
