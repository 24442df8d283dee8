#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "mfc/control.hpp"
#include "mfc/derivator.hpp"
#include "mfc/error.hpp"
#include "mfc/estimator.hpp"
#include "mfc/noise.hpp"
#include "mfc/plant.hpp"
#include "mfc/reference.hpp"

namespace mfc {

// ============================================================================
// Trace and metrics
// ============================================================================

struct SimulationTrace {
    double h = 0.0;
    std::string scenario;
    std::uint64_t seed = 0;
    std::string controller;
    bool diverged = false;

    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> y_true;
    std::vector<double> y_dot_true; // not exported
    std::vector<double> y_measured;
    std::vector<double> y_ref;
    std::vector<double> y_ref_dot; // not exported; kept for consistency checks
    std::vector<double> e;
    std::vector<double> f_hat;
    std::vector<double> f_true;

    [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
};

inline constexpr const char* kTraceCsvHeader = "t,u,y_true,y_measured,y_ref,e,f_hat,f_true";

namespace detail {

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

} // namespace detail

inline void write_trace_csv(const SimulationTrace& trace, std::ostream& os) {
    os << kTraceCsvHeader << '\n';
    using detail::format_number;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        os << format_number(trace.t[k]) << ',' << format_number(trace.u[k]) << ',' << format_number(trace.y_true[k]) << ','
           << format_number(trace.y_measured[k]) << ',' << format_number(trace.y_ref[k]) << ',' << format_number(trace.e[k])
           << ',' << format_number(trace.f_hat[k]) << ',' << format_number(trace.f_true[k]) << '\n';
    }
}

inline void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    write_trace_csv(trace, os);
    if (!os)
        throw Error(ErrorCode::IoFailure, "write failed on " + path);
}

struct Metrics {
    double rmse = 0.0;
    double iae = 0.0;
    double tail_max_abs_error = 0.0; // max |e| over the final 20% of samples
    bool diverged = false;
};

[[nodiscard]] inline Metrics compute_metrics(const std::vector<double>& e, double h, bool diverged = false) {
    if (e.empty())
        throw Error(ErrorCode::EmptyTrace, "cannot compute metrics of an empty trace");
    Metrics m;
    m.diverged = diverged;
    double sq = 0.0;
    for (double x : e)
        sq += x * x;
    m.rmse = std::sqrt(sq / static_cast<double>(e.size()));
    for (std::size_t k = 1; k < e.size(); ++k)
        m.iae += 0.5 * h * (std::abs(e[k - 1]) + std::abs(e[k]));
    const std::size_t tail_start = e.size() - std::max<std::size_t>(1, e.size() / 5);
    for (std::size_t k = tail_start; k < e.size(); ++k)
        m.tail_max_abs_error = std::max(m.tail_max_abs_error, std::abs(e[k]));
    return m;
}

[[nodiscard]] inline Metrics compute_metrics(const SimulationTrace& trace) {
    return compute_metrics(trace.e, trace.h, trace.diverged);
}

// ============================================================================
// Closed-loop runner
// ============================================================================

struct SimulationConfig {
    LtiPlant plant = example_plant();
    ControllerSpec controller{IpdGains{0.25, 1.0}, 0.5};
    EstimatorConfig estimator{};
    ReferenceTrajectory reference = SmoothStepReference{};
    NoiseModel noise{0.01, 0};
    double h = 1e-3;
    double duration = 20.0;
    double y0 = -0.05;
    double ydot0 = 0.0;
    double divergence_threshold = 1e3;
    // Feed the controller the exact F and e' computed from the plant state.
    // Only meaningful for nu = 2 laws, where the loop can be solved for u.
    bool oracle_estimator = false;
    std::string scenario;

    void validate() const {
        plant.validate();
        controller.validate();
        estimator.validate();
        if (!(h > 0.0))
            throw Error(ErrorCode::InvalidParams, "h must be positive");
        if (!(duration >= 10.0 * h))
            throw Error(ErrorCode::InvalidParams, "duration must cover at least 10 samples");
        if (!(noise.sigma >= 0.0))
            throw Error(ErrorCode::InvalidParams, "noise sigma must be nonnegative");
        if (const auto* s = std::get_if<SmoothStepReference>(&reference); s && !(s->t_end > s->t_start))
            throw Error(ErrorCode::InvalidParams, "smooth step needs t_end > t_start");
        if (controller.intelligent()) {
            if (estimator.nu != controller.nu())
                throw Error(ErrorCode::ConfigMismatch, controller.name() + " needs an estimator with nu = " +
                                                           std::to_string(controller.nu()));
            if (estimator.alpha != controller.alpha)
                throw Error(ErrorCode::ConfigMismatch, "estimator and controller alpha differ");
        }
        if (oracle_estimator) {
            if (controller.nu() != 2)
                throw Error(ErrorCode::ConfigMismatch, "oracle estimator requires a nu = 2 intelligent controller");
            if (plant.effective_gain() == 0.0)
                throw Error(ErrorCode::ConfigMismatch, "oracle estimator requires a nonzero actuator gain");
        }
    }
};

// Per sample k (t = k h): measure y + noise, update F_hat with u[k-1],
// evaluate the law, log f_true = y^(nu) - alpha u from the exact state, then
// hold u over [t, t + h). Stops early with `diverged` set once |y| exceeds
// the blow-up threshold.
[[nodiscard]] inline SimulationTrace run_closed_loop(const SimulationConfig& cfg) {
    cfg.validate();

    SimulationTrace trace;
    trace.h = cfg.h;
    trace.scenario = cfg.scenario;
    trace.seed = cfg.noise.seed;
    trace.controller = cfg.controller.name();

    const auto samples = static_cast<std::size_t>(std::llround(cfg.duration / cfg.h)) + 1;
    for (auto* column : {&trace.t, &trace.u, &trace.y_true, &trace.y_dot_true, &trace.y_measured, &trace.y_ref, &trace.y_ref_dot, &trace.e,
                         &trace.f_hat, &trace.f_true})
        column->reserve(samples);

    GaussianNoise noise(cfg.noise);
    FEstimator estimator(cfg.estimator, cfg.h);
    DerivatorFilter output_derivator(cfg.estimator.t_filter, 1, cfg.h);
    DerivatorFilter error_derivator(cfg.estimator.t_filter, 1, cfg.h);

    const PidGains gains = cfg.controller.unified();
    const double f_alpha = cfg.estimator.alpha;
    const int f_nu = cfg.estimator.nu;
    const bool is_pid = !cfg.controller.intelligent();

    PlantState state{cfg.y0, cfg.ydot0, 0.0};
    double u_prev = 0.0;
    double e_prev = 0.0;
    double e_int = 0.0;

    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) * cfg.h;
        state.t = t;
        const double y_meas = state.y + noise.next();
        const ReferenceSample ref = reference_eval(cfg.reference, t);
        const double e = ref.value - y_meas;
        if (k > 0)
            e_int += 0.5 * cfg.h * (e_prev + e);

        const double f_hat_filtered = estimator.update(y_meas, u_prev);
        const double y_dot_filtered = output_derivator.step(y_meas);
        const double e_dot_filtered = error_derivator.step(e);

        double u = 0.0;
        double f_hat = f_hat_filtered;
        if (cfg.oracle_estimator) {
            // F = c + (b delta - alpha) u with c the input-free part of y''.
            const double c = cfg.plant.acceleration(state.y, state.ydot, 0.0);
            const double e_dot = ref.dot - state.ydot;
            const double r = ref.ddot + gains.kp * e + gains.ki * e_int + gains.kd * e_dot;
            u = (r - c) / cfg.plant.effective_gain();
            f_hat = c + (cfg.plant.effective_gain() - cfg.controller.alpha) * u;
        } else if (is_pid) {
            u = control_classic_pid(e, e_int, e_dot_filtered, gains);
        } else if (cfg.controller.nu() == 1) {
            u = intelligent_law(f_hat, ref.dot, e, 0.0, 0.0, gains, cfg.controller.alpha);
        } else {
            const double e_dot = ref.dot - y_dot_filtered;
            u = intelligent_law(f_hat, ref.ddot, e, e_int, e_dot, gains, cfg.controller.alpha);
        }

        const double y_nu = f_nu == 1 ? state.ydot : cfg.plant.acceleration(state.y, state.ydot, u);

        trace.t.push_back(t);
        trace.u.push_back(u);
        trace.y_true.push_back(state.y);
        trace.y_dot_true.push_back(state.ydot);
        trace.y_measured.push_back(y_meas);
        trace.y_ref.push_back(ref.value);
        trace.y_ref_dot.push_back(ref.dot);
        trace.e.push_back(e);
        trace.f_hat.push_back(f_hat);
        trace.f_true.push_back(y_nu - f_alpha * u);

        if (std::abs(state.y) > cfg.divergence_threshold || !std::isfinite(u)) {
            trace.diverged = true;
            break;
        }
        if (k + 1 == samples)
            break;
        state = plant_step(cfg.plant, state, u, cfg.h);
        u_prev = u;
        e_prev = e;
    }
    return trace;
}

} // namespace mfc
