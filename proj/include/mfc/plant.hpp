#pragma once

#include <cmath>
#include <string>

#include "mfc/error.hpp"

namespace mfc {

// Second-order SISO plant  y'' + a1 y' + a0 y = b * delta * u.
// The example plant is y'' - y' = u, i.e. a1 = -1, a0 = 0, b = 1.
struct LtiPlant {
    double a1 = -1.0;
    double a0 = 0.0;
    double b = 1.0;
    double delta = 1.0; // actuator effectiveness in [0, 1]

    void validate() const {
        if (!(delta >= 0.0 && delta <= 1.0))
            throw Error(ErrorCode::InvalidParams, "delta must lie in [0, 1], got " + std::to_string(delta));
        if (!std::isfinite(a1) || !std::isfinite(a0) || !std::isfinite(b))
            throw Error(ErrorCode::InvalidParams, "plant coefficients must be finite");
    }

    [[nodiscard]] double effective_gain() const noexcept { return b * delta; }

    // y'' for the given state and held input.
    [[nodiscard]] double acceleration(double y, double ydot, double u) const noexcept {
        return -a1 * ydot - a0 * y + b * delta * u;
    }
};

[[nodiscard]] inline LtiPlant example_plant(double delta = 1.0) {
    return LtiPlant{-1.0, 0.0, 1.0, delta};
}

struct PlantState {
    double y = 0.0;
    double ydot = 0.0;
    double t = 0.0;
};

// One classical RK4 step of the plant under a zero-order-held input.
[[nodiscard]] inline PlantState plant_step(const LtiPlant& plant, const PlantState& state, double u, double h) {
    if (!(h > 0.0))
        throw Error(ErrorCode::InvalidParams, "step size h must be positive");
    if (!std::isfinite(u))
        throw Error(ErrorCode::NonFiniteState, "non-finite control input at t=" + std::to_string(state.t));

    const auto f = [&](double y, double v) { return plant.acceleration(y, v, u); };

    const double k1y = state.ydot;
    const double k1v = f(state.y, state.ydot);
    const double k2y = state.ydot + 0.5 * h * k1v;
    const double k2v = f(state.y + 0.5 * h * k1y, k2y);
    const double k3y = state.ydot + 0.5 * h * k2v;
    const double k3v = f(state.y + 0.5 * h * k2y, k3y);
    const double k4y = state.ydot + h * k3v;
    const double k4v = f(state.y + h * k3y, k4y);

    PlantState next;
    next.y = state.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    next.ydot = state.ydot + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    next.t = state.t + h;
    if (!std::isfinite(next.y) || !std::isfinite(next.ydot))
        throw Error(ErrorCode::NonFiniteState, "integration produced a non-finite state at t=" + std::to_string(next.t));
    return next;
}

} // namespace mfc
