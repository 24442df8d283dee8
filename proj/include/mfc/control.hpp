#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include "mfc/error.hpp"
#include "mfc/polynomial.hpp"

namespace mfc {

// ============================================================================
// Controller specifications
// ============================================================================

struct IpGains {
    double kp = 0.0;
};
struct IpiGains {
    double kp = 0.0;
    double ki = 0.0;
};
struct IpdGains {
    double kp = 0.0;
    double kd = 0.0;
};
struct IpidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};
struct ClassicPidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};

using ControllerGains = std::variant<IpGains, IpiGains, IpdGains, IpidGains, ClassicPidGains>;

struct ControllerSpec {
    ControllerGains gains;
    double alpha = 1.0; // unused by the classic PID

    [[nodiscard]] bool intelligent() const noexcept { return !std::holds_alternative<ClassicPidGains>(gains); }

    // Order of the ultra-local model the law is written for. iP is nu = 1;
    // the other intelligent laws use nu = 2. The classic PID has none (0).
    [[nodiscard]] int nu() const noexcept {
        if (std::holds_alternative<IpGains>(gains))
            return 1;
        return intelligent() ? 2 : 0;
    }

    [[nodiscard]] std::string name() const {
        return std::visit(
            [](const auto& g) -> std::string {
                using G = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<G, IpGains>)
                    return "ip";
                else if constexpr (std::is_same_v<G, IpiGains>)
                    return "ipi";
                else if constexpr (std::is_same_v<G, IpdGains>)
                    return "ipd";
                else if constexpr (std::is_same_v<G, IpidGains>)
                    return "ipid";
                else
                    return "pid";
            },
            gains);
    }

    // Gains in the common (kp, ki, kd) layout, masked per variant.
    [[nodiscard]] PidGains unified() const {
        return std::visit(
            [](const auto& g) -> PidGains {
                using G = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<G, IpGains>)
                    return {g.kp, 0.0, 0.0};
                else if constexpr (std::is_same_v<G, IpiGains>)
                    return {g.kp, g.ki, 0.0};
                else if constexpr (std::is_same_v<G, IpdGains>)
                    return {g.kp, 0.0, g.kd};
                else
                    return {g.kp, g.ki, g.kd};
            },
            gains);
    }

    void validate() const {
        const PidGains g = unified();
        if (!std::isfinite(g.kp) || !std::isfinite(g.ki) || !std::isfinite(g.kd))
            throw Error(ErrorCode::InvalidParams, "controller gains must be finite");
        if (intelligent() && (alpha == 0.0 || !std::isfinite(alpha)))
            throw Error(ErrorCode::InvalidParams, "intelligent controllers need a finite nonzero alpha");
    }
};

// ============================================================================
// Control laws
// ============================================================================

// u = -(F_hat - y*^(nu) - kp e - ki int(e) - kd e') / alpha
// Every intelligent law is this core with some gains masked to zero.
[[nodiscard]] inline double intelligent_law(double f_hat, double reference_derivative, double e, double e_int, double e_dot,
                                            const PidGains& g, double alpha) {
    return -(f_hat - reference_derivative - g.kp * e - g.ki * e_int - g.kd * e_dot) / alpha;
}

[[nodiscard]] inline double control_ip(double f_hat, double ystar_dot, double e, const ControllerSpec& spec) {
    return intelligent_law(f_hat, ystar_dot, e, 0.0, 0.0, {spec.unified().kp, 0.0, 0.0}, spec.alpha);
}

[[nodiscard]] inline double control_ipd(double f_hat, double ystar_ddot, double e, double e_dot, const ControllerSpec& spec) {
    const PidGains g = spec.unified();
    return intelligent_law(f_hat, ystar_ddot, e, 0.0, e_dot, {g.kp, 0.0, g.kd}, spec.alpha);
}

[[nodiscard]] inline double control_ipi(double f_hat, double ystar_ddot, double e, double e_int, const ControllerSpec& spec) {
    const PidGains g = spec.unified();
    return intelligent_law(f_hat, ystar_ddot, e, e_int, 0.0, {g.kp, g.ki, 0.0}, spec.alpha);
}

[[nodiscard]] inline double control_ipid(double f_hat, double ystar_ddot, double e, double e_int, double e_dot,
                                         const ControllerSpec& spec) {
    return intelligent_law(f_hat, ystar_ddot, e, e_int, e_dot, spec.unified(), spec.alpha);
}

[[nodiscard]] inline double control_classic_pid(double e, double e_int, double e_dot_filtered, const PidGains& g) {
    return g.kp * e + g.ki * e_int + g.kd * e_dot_filtered;
}

} // namespace mfc
