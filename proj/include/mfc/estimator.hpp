#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "mfc/derivator.hpp"
#include "mfc/error.hpp"
#include "mfc/plant.hpp"

namespace mfc {

enum class EstimatorVariant {
    // F = y^(nu) - alpha u, with y^(nu) from the derivator and the previous
    // control passed through the matching lag. Needs no plant knowledge.
    DelayedInput,
    // u eliminated through the known plant relation; for y'' - y' = u this is
    //   nu = 1:  F = -alpha D2[y] + (1 + alpha) D1[y]
    //   nu = 2:  F = (1 - alpha) D2[y] + alpha D1[y]
    AnalysisForm,
};

struct EstimatorConfig {
    int nu = 2;
    double alpha = 0.5;
    double t_filter = 0.1;
    EstimatorVariant variant = EstimatorVariant::DelayedInput;
    std::optional<LtiPlant> plant; // required by AnalysisForm only

    void validate() const {
        if (nu != 1 && nu != 2)
            throw Error(ErrorCode::ConfigMismatch, "estimator order nu must be 1 or 2, got " + std::to_string(nu));
        if (alpha == 0.0 || !std::isfinite(alpha))
            throw Error(ErrorCode::ConfigMismatch, "estimator alpha must be finite and nonzero");
        if (!(t_filter > 0.0))
            throw Error(ErrorCode::ConfigMismatch, "estimator filter constant must be positive");
        if (variant == EstimatorVariant::AnalysisForm) {
            if (!plant)
                throw Error(ErrorCode::ConfigMismatch, "analysis-form estimator needs the plant coefficients");
            if (plant->b == 0.0)
                throw Error(ErrorCode::ConfigMismatch, "analysis-form estimator needs a nonzero input gain");
        }
    }
};

// Online estimate of the lumped term F of the ultra-local model
// y^(nu) = F + alpha u. One instance per control loop.
class FEstimator {
public:
    FEstimator(const EstimatorConfig& cfg, double h)
        : cfg_((cfg.validate(), cfg)),
          d1_(cfg.t_filter, 1, h),
          d2_(cfg.t_filter, 2, h),
          input_lag_(cfg.t_filter, cfg.nu, h) {}

    // `u_prev` is the control held over the previous sample period.
    double update(double y_measured, double u_prev) {
        const double dy = d1_.step(y_measured);
        const double ddy = d2_.step(y_measured);

        if (cfg_.variant == EstimatorVariant::DelayedInput) {
            const double lagged_u = input_lag_.step(u_prev);
            const double derivative = cfg_.nu == 1 ? dy : ddy;
            return derivative - cfg_.alpha * lagged_u;
        }

        // u = (y'' + a1 y' + a0 y) / b on the nominal plant.
        const LtiPlant& p = *cfg_.plant;
        const double k = cfg_.alpha / p.b;
        if (cfg_.nu == 1)
            return -k * ddy + (1.0 - k * p.a1) * dy - k * p.a0 * y_measured;
        return (1.0 - k) * ddy - k * p.a1 * dy - k * p.a0 * y_measured;
    }

    void reset() {
        d1_.reset();
        d2_.reset();
        input_lag_.reset();
    }

    [[nodiscard]] const EstimatorConfig& config() const noexcept { return cfg_; }

private:
    EstimatorConfig cfg_;
    DerivatorFilter d1_;
    DerivatorFilter d2_;
    LagFilter input_lag_;
};

} // namespace mfc
