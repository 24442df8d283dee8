#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mfc/error.hpp"
#include "mfc/plant.hpp"

namespace mfc {

// ============================================================================
// Polynomial in the Laplace variable s
// ============================================================================
// Coefficients are stored in ascending degree: coeffs()[k] multiplies s^k.
// Trailing coefficients with |c_k| <= 1e-12 * max|c_j| are trimmed so float
// dust never inflates the degree. The zero polynomial is stored as {0}.

class Polynomial {
public:
    static constexpr double kTrimThreshold = 1e-12;
    static constexpr std::size_t kMaxDegree = 12;

    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { normalize(); }
    explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { normalize(); }

    [[nodiscard]] static Polynomial monomial(std::size_t degree, double c = 1.0) {
        std::vector<double> v(degree + 1, 0.0);
        v.back() = c;
        return Polynomial(std::move(v));
    }

    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    [[nodiscard]] double leading() const noexcept { return coeffs_.back(); }
    [[nodiscard]] bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

    [[nodiscard]] double coeff(std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0.0; }

    [[nodiscard]] bool is_monic(double tol = 1e-12) const noexcept { return std::abs(leading() - 1.0) <= tol; }

    template <typename Scalar>
    [[nodiscard]] Scalar evaluate(Scalar x) const {
        Scalar acc{0};
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
            acc = acc * x + Scalar(*it);
        return acc;
    }

    [[nodiscard]] Polynomial derivative() const {
        if (coeffs_.size() == 1)
            return Polynomial{};
        std::vector<double> d(coeffs_.size() - 1);
        for (std::size_t k = 1; k < coeffs_.size(); ++k)
            d[k - 1] = static_cast<double>(k) * coeffs_[k];
        return Polynomial(std::move(d));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> r(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] = a.coeff(k) + b.coeff(k);
        return Polynomial(std::move(r));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        std::vector<double> r(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j)
                r[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(r));
    }

    friend Polynomial operator*(double s, const Polynomial& p) {
        std::vector<double> r = p.coeffs_;
        for (auto& c : r)
            c *= s;
        return Polynomial(std::move(r));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void normalize() {
        if (coeffs_.empty()) {
            coeffs_.push_back(0.0);
            return;
        }
        double scale = 0.0;
        for (double c : coeffs_)
            scale = std::max(scale, std::abs(c));
        const double cut = kTrimThreshold * scale;
        while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= cut)
            coeffs_.pop_back();
        if (coeffs_.size() == 1 && std::abs(coeffs_[0]) <= cut)
            coeffs_[0] = 0.0;
    }

    std::vector<double> coeffs_;
};

// ============================================================================
// Routh-Hurwitz classification
// ============================================================================

enum class StabilityKind { Hurwitz, Unstable, Marginal };

[[nodiscard]] constexpr const char* to_string(StabilityKind k) noexcept {
    switch (k) {
    case StabilityKind::Hurwitz: return "hurwitz";
    case StabilityKind::Unstable: return "unstable";
    case StabilityKind::Marginal: return "marginal";
    }
    return "?";
}

struct StabilityVerdict {
    StabilityKind kind = StabilityKind::Marginal;
    int right_half_plane_count = 0; // sign changes in the first column; meaningful for Unstable
    bool degenerate = false;        // epsilon substitution or auxiliary polynomial was used

    [[nodiscard]] bool hurwitz() const noexcept { return kind == StabilityKind::Hurwitz; }
};

namespace detail {

inline void require_stability_operand(const Polynomial& p) {
    if (p.is_zero())
        throw Error(ErrorCode::ZeroPolynomial, "stability of the zero polynomial is undefined");
    if (p.degree() == 0)
        throw Error(ErrorCode::DegreeZero, "a constant polynomial has no roots to classify");
    if (p.degree() > Polynomial::kMaxDegree)
        throw Error(ErrorCode::InvalidParams, "degree " + std::to_string(p.degree()) + " exceeds the supported maximum");
}

inline double max_abs(const std::vector<double>& row) {
    double m = 0.0;
    for (double x : row)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace detail

// Degenerate-case policy:
//  - a zero leading element in a nonzero row is replaced by
//    eps = 1e-9 * (largest magnitude seen in the table so far);
//  - an all-zero row is replaced by the derivative of the auxiliary
//    polynomial formed from the row above.
// Both set `degenerate`. Without sign changes a degenerate table means roots
// touch the imaginary axis and the verdict is Marginal.
[[nodiscard]] inline StabilityVerdict routh_hurwitz(const Polynomial& input) {
    detail::require_stability_operand(input);

    const Polynomial p = input.leading() < 0.0 ? -1.0 * input : input;
    const std::size_t n = p.degree();
    const std::size_t width = n / 2 + 1;
    constexpr double kZeroTol = 1e-12;
    constexpr double kEpsFactor = 1e-9;

    std::vector<double> above(width, 0.0);
    std::vector<double> current(width, 0.0);
    for (std::size_t j = 0; j < width; ++j) {
        if (n >= 2 * j)
            above[j] = p.coeff(n - 2 * j);
        if (n >= 2 * j + 1)
            current[j] = p.coeff(n - 2 * j - 1);
    }

    double table_scale = std::max(detail::max_abs(above), detail::max_abs(current));
    bool degenerate = false;
    bool axis_touching = false;
    std::vector<double> first_column{above[0]};

    // `above` holds the row for s^(row_power + 1), `current` for s^row_power.
    for (std::size_t row_power = n - 1;; --row_power) {
        const double row_scale = std::max(detail::max_abs(above), detail::max_abs(current));

        if (detail::max_abs(current) <= kZeroTol * detail::max_abs(above)) {
            // Auxiliary polynomial from `above` has degree row_power + 1 and
            // only every other power present; replace `current` by its derivative.
            const std::size_t aux_degree = row_power + 1;
            for (std::size_t j = 0; j < width; ++j) {
                const std::ptrdiff_t power = static_cast<std::ptrdiff_t>(aux_degree) - 2 * static_cast<std::ptrdiff_t>(j);
                current[j] = power > 0 ? above[j] * static_cast<double>(power) : 0.0;
            }
            degenerate = true;
            axis_touching = true;
        } else if (std::abs(current[0]) <= kZeroTol * row_scale) {
            current[0] = kEpsFactor * table_scale;
            degenerate = true;
        }
        first_column.push_back(current[0]);
        table_scale = std::max(table_scale, detail::max_abs(current));

        if (row_power == 0)
            break;

        std::vector<double> next(width, 0.0);
        for (std::size_t j = 0; j + 1 < width; ++j)
            next[j] = (current[0] * above[j + 1] - above[0] * current[j + 1]) / current[0];
        above = std::move(current);
        current = std::move(next);
    }

    int sign_changes = 0;
    for (std::size_t i = 1; i < first_column.size(); ++i)
        if ((first_column[i - 1] > 0.0) != (first_column[i] > 0.0))
            ++sign_changes;

    StabilityVerdict v;
    v.degenerate = degenerate;
    if (sign_changes > 0) {
        v.kind = StabilityKind::Unstable;
        v.right_half_plane_count = sign_changes;
    } else if (degenerate || axis_touching) {
        v.kind = StabilityKind::Marginal;
    } else {
        v.kind = StabilityKind::Hurwitz;
    }
    return v;
}

// ============================================================================
// Numeric root oracle
// ============================================================================
// Roots are the eigenvalues of the companion matrix of the monic-normalized
// polynomial (Eigen's real Schur based solver). Perturbed copies of a
// multiple root scatter on a circle of radius ~eps^(1/m); roots closer than
// kClusterTol * max(1, |z|) are merged and replaced by their centroid, which
// is accurate to O(eps) for a genuine multiple root.

struct RootFinderDiagnostics {
    std::size_t degree = 0;
    int max_iterations = 0;
};

[[nodiscard]] inline std::vector<std::complex<double>> polynomial_roots(const Polynomial& p, int max_iterations_per_root = 40) {
    detail::require_stability_operand(p);
    const std::size_t n = p.degree();
    const double lead = p.leading();

    if (n == 1)
        return {std::complex<double>(-p.coeff(0) / lead, 0.0)};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i)
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    for (std::size_t k = 0; k < n; ++k)
        companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n - 1)) = -p.coeff(k) / lead;

    Eigen::EigenSolver<Eigen::MatrixXd> solver;
    solver.setMaxIterations(max_iterations_per_root);
    solver.compute(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::ConvergenceFailure,
                    "companion eigenvalue iteration did not converge (degree " + std::to_string(n) +
                        ", max iterations " + std::to_string(max_iterations_per_root * static_cast<int>(n)) + ")");
    }

    std::vector<std::complex<double>> raw(n);
    for (std::size_t i = 0; i < n; ++i)
        raw[i] = solver.eigenvalues()[static_cast<Eigen::Index>(i)];

    constexpr double kClusterTol = 1e-4;
    std::vector<std::complex<double>> roots(n);
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i])
            continue;
        std::vector<std::size_t> members{i};
        used[i] = true;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!used[j] && std::abs(raw[j] - raw[i]) <= kClusterTol * std::max(1.0, std::abs(raw[i]))) {
                members.push_back(j);
                used[j] = true;
            }
        }
        std::complex<double> centroid{0.0, 0.0};
        for (auto m : members)
            centroid += raw[m];
        centroid /= static_cast<double>(members.size());
        for (auto m : members)
            roots[m] = {centroid.real(), raw[m].imag()};
    }
    return roots;
}

[[nodiscard]] inline double max_real_part_of_roots(const Polynomial& p) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& z : polynomial_roots(p))
        m = std::max(m, z.real());
    return m;
}

// ============================================================================
// Closed-loop polynomials and pole placement
// ============================================================================

// Parameters of the iP loop on y'' - y' = u with the filtered analysis-form
// estimator: ultra-local gain alpha, proportional gain kp, filter constant T.
struct IpLoopParams {
    double alpha = 1.0;
    double kp = 1.0;
    double t_filter = 0.1;

    void validate() const {
        if (alpha == 0.0 || !std::isfinite(alpha))
            throw Error(ErrorCode::InvalidParams, "alpha must be finite and nonzero");
        if (!(t_filter > 0.0) || !std::isfinite(t_filter))
            throw Error(ErrorCode::InvalidParams, "filter time constant T must be positive");
        if (!std::isfinite(kp))
            throw Error(ErrorCode::InvalidParams, "kp must be finite");
    }
};

// T^2 s^4 + (2T - T^2) s^3 + (-2T + T(1 + 1/alpha) - T^2 kp/alpha) s^2
//   + (1/alpha - 2T kp/alpha) s - kp/alpha
//
// Not monic; the leading coefficient T^2 is kept as is. In this form the
// proportional gain enters with the sign opposite to the iP law written on
// e = y* - y: the simulated loop realizing it uses law gain -kp.
[[nodiscard]] inline Polynomial ip_charpoly(const IpLoopParams& params) {
    params.validate();
    const double a = params.alpha;
    const double k = params.kp;
    const double t = params.t_filter;
    return Polynomial{
        -k / a,
        1.0 / a - 2.0 * t * k / a,
        -2.0 * t + t * (1.0 + 1.0 / a) - t * t * k / a,
        2.0 * t - t * t,
        t * t,
    };
}

// (s + r)^multiplicity from the binomial theorem.
[[nodiscard]] inline Polynomial expand_pole(double r, unsigned multiplicity) {
    if (multiplicity == 0)
        throw Error(ErrorCode::InvalidParams, "multiplicity must be at least 1");
    std::vector<double> c(multiplicity + 1);
    double binom = 1.0;
    for (unsigned k = 0; k <= multiplicity; ++k) {
        c[k] = binom * std::pow(r, static_cast<double>(multiplicity - k));
        binom = binom * static_cast<double>(multiplicity - k) / static_cast<double>(k + 1);
    }
    return Polynomial(std::move(c));
}

struct PdGains {
    double kp = 0.0;
    double kd = 0.0;
};

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};

// Matches e'' + kd e' + kp e to a monic quadratic.
[[nodiscard]] inline PdGains ipd_gains_from_target(const Polynomial& target) {
    if (target.degree() != 2)
        throw Error(ErrorCode::WrongDegree, "iPD target must have degree 2, got " + std::to_string(target.degree()));
    if (!target.is_monic())
        throw Error(ErrorCode::NotMonic, "iPD target must be monic");
    return {target.coeff(0), target.coeff(1)};
}

// Closed loop of u = kp e + ki int(e) + kd e' on the plant, y* = 0:
//   s^3 + (a1 + g kd) s^2 + (a0 + g kp) s + g ki,   g = b * delta.
[[nodiscard]] inline Polynomial pid_closed_loop_charpoly(const LtiPlant& plant, const PidGains& gains) {
    const double g = plant.effective_gain();
    return Polynomial{g * gains.ki, plant.a0 + g * gains.kp, plant.a1 + g * gains.kd, 1.0};
}

// Tuned on the nominal actuator (delta ignored): unique solution of
// pid_closed_loop_charpoly(plant with delta = 1, gains) == target.
[[nodiscard]] inline PidGains pid_gains_from_target(const LtiPlant& plant, const Polynomial& target) {
    if (plant.b == 0.0)
        throw Error(ErrorCode::ZeroInputGain, "plant input gain b is zero; no PID can place the poles");
    if (target.degree() != 3)
        throw Error(ErrorCode::WrongDegree, "PID target must have degree 3, got " + std::to_string(target.degree()));
    if (!target.is_monic())
        throw Error(ErrorCode::NotMonic, "PID target must be monic");
    PidGains g;
    g.kd = (target.coeff(2) - plant.a1) / plant.b;
    g.kp = (target.coeff(1) - plant.a0) / plant.b;
    g.ki = target.coeff(0) / plant.b;
    return g;
}

} // namespace mfc
