#pragma once

#include <algorithm>
#include <variant>

namespace mfc {

struct ReferenceSample {
    double value = 0.0;
    double dot = 0.0;
    double ddot = 0.0;
};

struct ConstantReference {
    double level = 0.0;
};

// Quintic transition y_start -> y_end over [t_start, t_end] with zero first
// and second derivatives at both ends; constant outside the window.
struct SmoothStepReference {
    double y_start = 0.0;
    double y_end = 1.0;
    double t_start = 1.0;
    double t_end = 6.0;
};

using ReferenceTrajectory = std::variant<ConstantReference, SmoothStepReference>;

[[nodiscard]] inline ReferenceSample reference_eval(const ConstantReference& ref, double) { return {ref.level, 0.0, 0.0}; }

[[nodiscard]] inline ReferenceSample reference_eval(const SmoothStepReference& ref, double t) {
    const double span = ref.t_end - ref.t_start;
    const double rise = ref.y_end - ref.y_start;
    if (t <= ref.t_start)
        return {ref.y_start, 0.0, 0.0};
    if (t >= ref.t_end)
        return {ref.y_end, 0.0, 0.0};
    const double tau = (t - ref.t_start) / span;
    const double tau2 = tau * tau;
    const double tau3 = tau2 * tau;
    const double s = tau3 * (10.0 - 15.0 * tau + 6.0 * tau2);
    const double ds = 30.0 * tau2 * (1.0 - 2.0 * tau + tau2);
    const double dds = 60.0 * tau * (1.0 - 3.0 * tau + 2.0 * tau2);
    return {ref.y_start + rise * s, rise * ds / span, rise * dds / (span * span)};
}

[[nodiscard]] inline ReferenceSample reference_eval(const ReferenceTrajectory& ref, double t) {
    return std::visit([t](const auto& r) { return reference_eval(r, t); }, ref);
}

} // namespace mfc
