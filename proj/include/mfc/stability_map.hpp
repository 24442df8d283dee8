#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mfc/error.hpp"
#include "mfc/polynomial.hpp"
#include "mfc/simulation.hpp"

namespace mfc {

// ============================================================================
// Grid specification
// ============================================================================

struct Axis {
    double min = -5.0;
    double max = 5.0;
    std::size_t count = 201;

    [[nodiscard]] double at(std::size_t i) const {
        return min + (max - min) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
};

enum class Aggregation { FixedT, ForAllT };

struct GridSpec {
    Axis kp_axis{};
    Axis alpha_axis{};
    std::vector<double> t_axis{0.1};
    Aggregation aggregation = Aggregation::FixedT;
    std::size_t fixed_t_index = 0;

    void validate() const {
        for (const Axis* a : {&kp_axis, &alpha_axis}) {
            if (a->count < 2)
                throw Error(ErrorCode::InvalidGrid, "axis needs at least 2 points");
            if (!(a->max > a->min))
                throw Error(ErrorCode::InvalidGrid, "axis must be strictly increasing");
        }
        if (t_axis.empty())
            throw Error(ErrorCode::InvalidGrid, "T axis is empty");
        for (std::size_t i = 0; i < t_axis.size(); ++i) {
            if (!(t_axis[i] > 0.0))
                throw Error(ErrorCode::InvalidGrid, "all T values must be positive");
            if (i > 0 && !(t_axis[i] > t_axis[i - 1]))
                throw Error(ErrorCode::InvalidGrid, "T axis must be strictly ascending");
        }
        if (aggregation == Aggregation::FixedT && fixed_t_index >= t_axis.size())
            throw Error(ErrorCode::InvalidGrid, "fixed T index out of range");
    }
};

// n values spaced logarithmically over [lo, hi], endpoints included.
[[nodiscard]] inline std::vector<double> log_space(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

// K_P, alpha in [-5, 5] x 201 at T = 0.1 s.
[[nodiscard]] inline GridSpec default_fixed_t_grid() { return GridSpec{}; }

// Same (K_P, alpha) plane, 25 log-spaced T in [1e-3, 1.9], stable only if
// stable for every T.
[[nodiscard]] inline GridSpec default_for_all_t_grid() {
    GridSpec g;
    g.t_axis = log_space(1e-3, 1.9, 25);
    g.aggregation = Aggregation::ForAllT;
    return g;
}

// ============================================================================
// Sweep
// ============================================================================

enum class CellVerdict : std::uint8_t { Stable, Unstable, Marginal, Excluded };

[[nodiscard]] constexpr const char* to_string(CellVerdict v) noexcept {
    switch (v) {
    case CellVerdict::Stable: return "stable";
    case CellVerdict::Unstable: return "unstable";
    case CellVerdict::Marginal: return "marginal";
    case CellVerdict::Excluded: return "excluded";
    }
    return "?";
}

inline constexpr double kAlphaExclusionBand = 1e-9;

struct StabilityGrid {
    GridSpec spec;
    std::vector<CellVerdict> cells; // kp-major: cells[kp_index * alpha_count + alpha_index]
    double stable_fraction = 0.0;

    [[nodiscard]] CellVerdict at(std::size_t kp_index, std::size_t alpha_index) const {
        return cells[kp_index * spec.alpha_axis.count + alpha_index];
    }

    [[nodiscard]] std::size_t count(CellVerdict v) const {
        return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), v));
    }
};

[[nodiscard]] inline CellVerdict classify_cell(double kp, double alpha, double t_filter) {
    switch (routh_hurwitz(ip_charpoly({alpha, kp, t_filter})).kind) {
    case StabilityKind::Hurwitz: return CellVerdict::Stable;
    case StabilityKind::Unstable: return CellVerdict::Unstable;
    case StabilityKind::Marginal: return CellVerdict::Marginal;
    }
    return CellVerdict::Marginal;
}

[[nodiscard]] inline StabilityGrid sweep(const GridSpec& spec) {
    spec.validate();
    StabilityGrid grid;
    grid.spec = spec;
    grid.cells.resize(spec.kp_axis.count * spec.alpha_axis.count);

    std::size_t stable = 0;
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < spec.kp_axis.count; ++i) {
        const double kp = spec.kp_axis.at(i);
        for (std::size_t j = 0; j < spec.alpha_axis.count; ++j) {
            const double alpha = spec.alpha_axis.at(j);
            CellVerdict v;
            if (std::abs(alpha) < kAlphaExclusionBand) {
                v = CellVerdict::Excluded;
            } else if (spec.aggregation == Aggregation::FixedT) {
                v = classify_cell(kp, alpha, spec.t_axis[spec.fixed_t_index]);
            } else {
                v = CellVerdict::Stable;
                for (double t : spec.t_axis) {
                    const CellVerdict at_t = classify_cell(kp, alpha, t);
                    if (at_t == CellVerdict::Unstable) {
                        v = at_t;
                        break;
                    }
                    if (at_t == CellVerdict::Marginal)
                        v = at_t;
                }
            }
            grid.cells[i * spec.alpha_axis.count + j] = v;
            if (v != CellVerdict::Excluded)
                ++eligible;
            if (v == CellVerdict::Stable)
                ++stable;
        }
    }
    grid.stable_fraction = eligible == 0 ? 0.0 : static_cast<double>(stable) / static_cast<double>(eligible);
    return grid;
}

// ============================================================================
// Export
// ============================================================================

inline void write_grid_csv(const StabilityGrid& grid, std::ostream& os) {
    const bool fixed = grid.spec.aggregation == Aggregation::FixedT;
    os << (fixed ? "kp,alpha,t,verdict" : "kp,alpha,verdict") << '\n';
    const std::string t_text = fixed ? detail::format_number(grid.spec.t_axis[grid.spec.fixed_t_index]) : "";
    for (std::size_t i = 0; i < grid.spec.kp_axis.count; ++i) {
        const std::string kp = detail::format_number(grid.spec.kp_axis.at(i));
        for (std::size_t j = 0; j < grid.spec.alpha_axis.count; ++j) {
            os << kp << ',' << detail::format_number(grid.spec.alpha_axis.at(j)) << ',';
            if (fixed)
                os << t_text << ',';
            os << to_string(grid.at(i, j)) << '\n';
        }
    }
}

[[nodiscard]] inline std::filesystem::path grid_summary_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".summary.txt");
    return p;
}

// Writes the CSV and a companion `<stem>.summary.txt` holding stable_fraction.
inline void export_grid(const StabilityGrid& grid, const std::filesystem::path& path) {
    {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
        write_grid_csv(grid, os);
        if (!os)
            throw Error(ErrorCode::IoFailure, "write failed on " + path.string());
    }
    const auto summary = grid_summary_path(path);
    std::ofstream os(summary, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::IoFailure, "cannot open " + summary.string() + " for writing");
    os << "stable_fraction = " << detail::format_number(grid.stable_fraction) << '\n';
}

// ============================================================================
// Cross-validation against simulation
// ============================================================================

struct CrossValidationSample {
    double kp = 0.0;
    double alpha = 0.0;
    double t_filter = 0.0;
    CellVerdict predicted = CellVerdict::Marginal;
    double max_real_part = 0.0;
    bool simulated_bounded = false;
    bool agrees = false;
};

struct AgreementReport {
    std::vector<CrossValidationSample> samples;
    std::size_t skipped_in_band = 0;
    double agreement_rate = 0.0;
};

struct CrossValidationOptions {
    double boundary_band = 0.05;
    double h = 1e-3;
    double duration = 20.0;
    double y0 = -0.05;
    double divergence_threshold = 1e3;
};

// Noise-free iP loop at one (alpha, K_P, T) cell with the analysis-form
// estimator and y* = 0. The quartic is written with K_P entering opposite to
// the law's e = y* - y convention, so the law gain is -K_P.
[[nodiscard]] inline SimulationTrace simulate_ip_cell(double kp, double alpha, double t_filter,
                                                      const CrossValidationOptions& opt = {}) {
    SimulationConfig cfg;
    cfg.plant = example_plant();
    cfg.controller = ControllerSpec{IpGains{-kp}, alpha};
    cfg.estimator = EstimatorConfig{1, alpha, t_filter, EstimatorVariant::AnalysisForm, example_plant()};
    cfg.reference = ConstantReference{0.0};
    cfg.noise = NoiseModel{0.0, 0};
    cfg.h = opt.h;
    cfg.duration = opt.duration;
    cfg.y0 = opt.y0;
    cfg.divergence_threshold = opt.divergence_threshold;
    cfg.scenario = "cross-validate";
    return run_closed_loop(cfg);
}

// Draws cells alternately from the Stable and Unstable strata (seeded
// shuffle) and simulates until `samples` cells have been evaluated. A cell
// whose quartic has max root real part within the boundary band is skipped
// and replaced by another from the same stratum.
[[nodiscard]] inline AgreementReport cross_validate(const StabilityGrid& grid, std::size_t samples, std::uint64_t seed,
                                                    const CrossValidationOptions& opt = {}) {
    if (samples == 0)
        throw Error(ErrorCode::InvalidParams, "cross-validation needs at least one sample");
    if (grid.spec.aggregation != Aggregation::FixedT)
        throw Error(ErrorCode::InvalidGrid, "cross-validation needs a fixed-T grid");

    const double t_filter = grid.spec.t_axis[grid.spec.fixed_t_index];
    std::vector<std::vector<std::size_t>> strata(2);
    for (std::size_t idx = 0; idx < grid.cells.size(); ++idx) {
        if (grid.cells[idx] == CellVerdict::Stable)
            strata[0].push_back(idx);
        else if (grid.cells[idx] == CellVerdict::Unstable)
            strata[1].push_back(idx);
    }
    std::mt19937_64 rng(seed);
    for (auto& s : strata)
        std::shuffle(s.begin(), s.end(), rng);

    AgreementReport report;
    std::vector<std::size_t> cursor(strata.size(), 0);
    std::size_t agreed = 0;
    std::size_t turn = 0;
    while (report.samples.size() < samples) {
        auto& stratum = strata[turn % strata.size()];
        auto& pos = cursor[turn % strata.size()];
        if (cursor[0] >= strata[0].size() && cursor[1] >= strata[1].size())
            break;
        if (pos >= stratum.size()) {
            ++turn;
            continue;
        }
        const std::size_t idx = stratum[pos++];

        CrossValidationSample s;
        s.kp = grid.spec.kp_axis.at(idx / grid.spec.alpha_axis.count);
        s.alpha = grid.spec.alpha_axis.at(idx % grid.spec.alpha_axis.count);
        s.t_filter = t_filter;
        s.predicted = grid.cells[idx];
        s.max_real_part = max_real_part_of_roots(ip_charpoly({s.alpha, s.kp, t_filter}));
        if (std::abs(s.max_real_part) <= opt.boundary_band) {
            ++report.skipped_in_band;
            continue;
        }
        s.simulated_bounded = !simulate_ip_cell(s.kp, s.alpha, t_filter, opt).diverged;
        s.agrees = s.simulated_bounded == (s.predicted == CellVerdict::Stable);
        agreed += s.agrees ? 1 : 0;
        report.samples.push_back(s);
        ++turn;
    }
    report.agreement_rate =
        report.samples.empty() ? 0.0 : static_cast<double>(agreed) / static_cast<double>(report.samples.size());
    return report;
}

} // namespace mfc
