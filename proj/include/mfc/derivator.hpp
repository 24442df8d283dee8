#pragma once

#include <array>
#include <cmath>
#include <string>

#include "mfc/error.hpp"

namespace mfc {

// Backward-Euler first-order lag 1/(Ts + 1):
//   x[k] = (T x[k-1] + h u[k]) / (T + h)
class LagStage {
public:
    LagStage() = default;
    LagStage(double t_filter, double h) : t_(t_filter), h_(h) {}

    double step(double input) {
        state_ = (t_ * state_ + h_ * input) / (t_ + h_);
        return state_;
    }

    void reset() { state_ = 0.0; }
    [[nodiscard]] double value() const noexcept { return state_; }

private:
    double t_ = 1.0;
    double h_ = 1.0;
    double state_ = 0.0;
};

// Derivator filter s/(Ts+1) (order 1) or s^2/(Ts+1)^2 (order 2).
//
// Each stage is a backward difference feeding a backward-Euler lag, which is
// the backward-Euler image s -> (1 - z^-1)/h of s/(Ts+1). Order 2 cascades
// two such stages. On the very first sample the difference memory is primed
// with the sample itself, so a nonzero initial output does not produce a
// 1/h spike.
class DerivatorFilter {
public:
    DerivatorFilter(double t_filter, int order, double h) : t_filter_(t_filter), order_(order), h_(h) {
        if (!(t_filter > 0.0))
            throw Error(ErrorCode::InvalidParams, "derivator time constant must be positive");
        if (order != 1 && order != 2)
            throw Error(ErrorCode::InvalidParams, "derivator order must be 1 or 2, got " + std::to_string(order));
        if (!(h > 0.0))
            throw Error(ErrorCode::InvalidParams, "sample period must be positive");
        for (auto& s : stages_)
            s = LagStage(t_filter, h);
    }

    // Feed one sample; returns the filtered derivative of order `order()`.
    double step(double sample) {
        double signal = sample;
        for (int i = 0; i < order_; ++i) {
            if (!primed_)
                previous_[i] = signal;
            const double diff = (signal - previous_[i]) / h_;
            previous_[i] = signal;
            signal = stages_[i].step(diff);
        }
        primed_ = true;
        return signal;
    }

    void reset() {
        for (auto& s : stages_)
            s.reset();
        previous_ = {0.0, 0.0};
        primed_ = false;
    }

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] double time_constant() const noexcept { return t_filter_; }
    [[nodiscard]] double sample_period() const noexcept { return h_; }

private:
    double t_filter_;
    int order_;
    double h_;
    std::array<LagStage, 2> stages_{};
    std::array<double, 2> previous_{0.0, 0.0};
    bool primed_ = false;
};

// Plain lag cascade 1/(Ts+1)^order with the same discretization, used to put
// the applied control on the same time base as a derivator output.
class LagFilter {
public:
    LagFilter(double t_filter, int order, double h) : order_(order) {
        if (order != 1 && order != 2)
            throw Error(ErrorCode::InvalidParams, "lag order must be 1 or 2, got " + std::to_string(order));
        for (auto& s : stages_)
            s = LagStage(t_filter, h);
    }

    double step(double sample) {
        double signal = sample;
        for (int i = 0; i < order_; ++i)
            signal = stages_[i].step(signal);
        return signal;
    }

    void reset() {
        for (auto& s : stages_)
            s.reset();
    }

private:
    int order_;
    std::array<LagStage, 2> stages_{};
};

} // namespace mfc
