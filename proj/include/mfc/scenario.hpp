#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfc/error.hpp"
#include "mfc/polynomial.hpp"
#include "mfc/simulation.hpp"
#include "mfc/stability_map.hpp"

namespace mfc {

// ============================================================================
// Scenario configuration
// ============================================================================
// Plain-text format: one `key = value` per line, `#` starts a comment, blank
// lines ignored. Lists are comma separated. Resolution order is
// command-line flags > file > built-in defaults; unknown keys are rejected.

inline const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"ipd-nominal", "pid-nominal", "ipd-delta",       "pid-delta",
                                                "ip-attempt",  "stabmap-fixed-t", "stabmap-all-t", "compare"};
    return names;
}

struct ScenarioConfig {
    std::string name;
    std::filesystem::path out_dir = "out";

    std::vector<double> deltas; // empty: scenario default
    double sigma = 0.01;
    std::uint64_t seed = 0;
    double h = 1e-3;
    double duration = 20.0;
    double y0 = -0.05;
    double alpha = 0.5;
    double t_filter = 0.1;
    double ipd_pole = 0.5;  // iPD error dynamics (s + ipd_pole)^2
    double pid_pole = 0.66; // PID closed loop (s + pid_pole)^3

    double ref_start = 0.0;
    double ref_end = 1.0;
    double ref_t_start = 1.0;
    double ref_t_end = 6.0;

    double ip_alpha = 1.0; // ip-attempt non-Hurwitz default
    double ip_kp = 1.0;

    double grid_kp_min = -5.0;
    double grid_kp_max = 5.0;
    std::size_t grid_kp_count = 201;
    double grid_alpha_min = -5.0;
    double grid_alpha_max = 5.0;
    std::size_t grid_alpha_count = 201;
    double grid_t = 0.1;
    double grid_t_min = 1e-3;
    double grid_t_max = 1.9;
    std::size_t grid_t_count = 25;
    std::size_t xval_samples = 50;

    [[nodiscard]] std::vector<double> resolved_deltas() const {
        if (!deltas.empty())
            return deltas;
        if (name == "ipd-delta" || name == "pid-delta")
            return {0.8, 0.5};
        if (name == "compare")
            return {1.0, 0.8, 0.5};
        return {1.0};
    }

    [[nodiscard]] GridSpec grid_spec() const {
        GridSpec g;
        g.kp_axis = {grid_kp_min, grid_kp_max, grid_kp_count};
        g.alpha_axis = {grid_alpha_min, grid_alpha_max, grid_alpha_count};
        if (name == "stabmap-all-t") {
            g.t_axis = log_space(grid_t_min, grid_t_max, grid_t_count);
            g.aggregation = Aggregation::ForAllT;
        } else {
            g.t_axis = {grid_t};
            g.aggregation = Aggregation::FixedT;
        }
        return g;
    }

    void validate() const {
        if (std::find(scenario_names().begin(), scenario_names().end(), name) == scenario_names().end())
            throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + name + "'");
        for (double d : deltas)
            if (!(d >= 0.0 && d <= 1.0))
                throw Error(ErrorCode::InvalidConfig, "delta = " + detail::format_number(d) + " is outside [0, 1]");
        const auto positive = [](double v, const char* key) {
            if (!(v > 0.0))
                throw Error(ErrorCode::InvalidConfig, std::string(key) + " must be positive");
        };
        positive(h, "h");
        positive(duration, "duration");
        positive(t_filter, "t_filter");
        positive(grid_t, "grid_t");
        positive(grid_t_min, "grid_t_min");
        positive(grid_t_max, "grid_t_max");
        if (!(sigma >= 0.0))
            throw Error(ErrorCode::InvalidConfig, "sigma must be nonnegative");
        if (alpha == 0.0)
            throw Error(ErrorCode::InvalidConfig, "alpha must be nonzero");
        if (ip_alpha == 0.0)
            throw Error(ErrorCode::InvalidConfig, "ip_alpha must be nonzero");
        if (duration < 10.0 * h)
            throw Error(ErrorCode::InvalidConfig, "duration must cover at least 10 samples of h");
        if (!(ref_t_end > ref_t_start))
            throw Error(ErrorCode::InvalidConfig, "ref_t_end must exceed ref_t_start");
        if (xval_samples == 0)
            throw Error(ErrorCode::InvalidConfig, "xval_samples must be at least 1");
        if (name.rfind("stabmap", 0) == 0)
            grid_spec().validate();
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw Error(ErrorCode::InvalidConfig,
                    "key '" + std::string(key) + "': cannot parse '" + std::string(text) + "' as a number");
    return value;
}

inline std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(parse_number<double>(key, trim(text.substr(0, comma))));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    if (out.empty())
        throw Error(ErrorCode::InvalidConfig, "key '" + std::string(key) + "': empty list");
    return out;
}

} // namespace detail

// Applies one `key = value` assignment; throws InvalidConfig naming the key.
inline void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view raw) {
    using detail::parse_number;
    const std::string_view value = detail::trim(raw);
    const std::map<std::string_view, double*> reals{
        {"sigma", &cfg.sigma},
        {"h", &cfg.h},
        {"duration", &cfg.duration},
        {"y0", &cfg.y0},
        {"alpha", &cfg.alpha},
        {"t_filter", &cfg.t_filter},
        {"ipd_pole", &cfg.ipd_pole},
        {"pid_pole", &cfg.pid_pole},
        {"ref_start", &cfg.ref_start},
        {"ref_end", &cfg.ref_end},
        {"ref_t_start", &cfg.ref_t_start},
        {"ref_t_end", &cfg.ref_t_end},
        {"ip_alpha", &cfg.ip_alpha},
        {"ip_kp", &cfg.ip_kp},
        {"grid_kp_min", &cfg.grid_kp_min},
        {"grid_kp_max", &cfg.grid_kp_max},
        {"grid_alpha_min", &cfg.grid_alpha_min},
        {"grid_alpha_max", &cfg.grid_alpha_max},
        {"grid_t", &cfg.grid_t},
        {"grid_t_min", &cfg.grid_t_min},
        {"grid_t_max", &cfg.grid_t_max},
    };
    const std::map<std::string_view, std::size_t*> counts{
        {"grid_kp_count", &cfg.grid_kp_count},
        {"grid_alpha_count", &cfg.grid_alpha_count},
        {"grid_t_count", &cfg.grid_t_count},
        {"xval_samples", &cfg.xval_samples},
    };

    if (auto it = reals.find(key); it != reals.end()) {
        *it->second = parse_number<double>(key, value);
    } else if (auto ct = counts.find(key); ct != counts.end()) {
        *ct->second = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "delta") {
        cfg.deltas = detail::parse_list(key, value);
    } else if (key == "scenario") {
        cfg.name = std::string(value);
    } else if (key == "out") {
        cfg.out_dir = std::string(value);
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown key '" + std::string(key) + "'");
    }
}

inline void apply_assignment(ScenarioConfig& cfg, std::string_view line, const std::string& origin) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
        throw Error(ErrorCode::InvalidConfig, origin + ": expected 'key = value', got '" + std::string(line) + "'");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
}

inline void apply_config_text(ScenarioConfig& cfg, std::string_view text, const std::string& origin = "config") {
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        apply_assignment(cfg, line, origin + ":" + std::to_string(line_no));
    }
}

// Command-line side of the resolution: everything here overrides the file.
struct ConfigOverrides {
    std::optional<std::string> scenario;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> assignments; // `key=value`
};

[[nodiscard]] inline ScenarioConfig parse_config(const std::optional<std::filesystem::path>& file,
                                                 const ConfigOverrides& flags) {
    ScenarioConfig cfg;
    if (file) {
        std::ifstream is(*file, std::ios::binary);
        if (!is)
            throw Error(ErrorCode::IoFailure, "cannot read config file " + file->string());
        std::ostringstream ss;
        ss << is.rdbuf();
        apply_config_text(cfg, ss.str(), file->string());
    }
    for (const auto& a : flags.assignments)
        apply_assignment(cfg, a, "--set");
    if (flags.scenario)
        cfg.name = *flags.scenario;
    if (flags.out_dir)
        cfg.out_dir = *flags.out_dir;
    if (flags.seed)
        cfg.seed = *flags.seed;
    cfg.validate();
    return cfg;
}

// ============================================================================
// Scenario execution
// ============================================================================

struct CompareEntry {
    std::string controller;
    double delta = 1.0;
    Metrics metrics;
};

struct CompareReport {
    std::vector<CompareEntry> entries;
    std::vector<std::pair<double, std::string>> winners; // per delta, by tail_max_abs_error
};

// Lower tail_max_abs_error wins; a diverged run never beats a bounded one.
[[nodiscard]] inline std::vector<std::pair<double, std::string>> pick_winners(const std::vector<CompareEntry>& entries) {
    std::vector<std::pair<double, std::string>> winners;
    std::vector<double> deltas;
    for (const auto& e : entries)
        if (std::find(deltas.begin(), deltas.end(), e.delta) == deltas.end())
            deltas.push_back(e.delta);
    for (double d : deltas) {
        const CompareEntry* best = nullptr;
        for (const auto& e : entries) {
            if (e.delta != d)
                continue;
            const auto key = [](const CompareEntry& x) { return std::pair{x.metrics.diverged, x.metrics.tail_max_abs_error}; };
            if (!best || key(e) < key(*best))
                best = &e;
        }
        winners.emplace_back(d, best->controller);
    }
    return winners;
}

struct ScenarioResult {
    std::filesystem::path directory;
    std::vector<std::filesystem::path> files;
    std::optional<CompareReport> compare;
    std::optional<double> stable_fraction;
    std::optional<double> agreement_rate;
};

namespace detail {

class MetricsWriter {
public:
    void put(const std::string& key, const std::string& value) { lines_ << key << " = " << value << '\n'; }
    void put(const std::string& key, double value) { put(key, format_number(value)); }
    void put_metrics(const std::string& prefix, const Metrics& m) {
        put(prefix + ".rmse", m.rmse);
        put(prefix + ".iae", m.iae);
        put(prefix + ".tail_max_abs_error", m.tail_max_abs_error);
        put(prefix + ".diverged", m.diverged ? "true" : "false");
    }
    void write(const std::filesystem::path& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
        os << lines_.str();
    }

private:
    std::ostringstream lines_;
};

inline SimulationConfig base_simulation(const ScenarioConfig& cfg, double delta) {
    SimulationConfig sim;
    sim.plant = example_plant(delta);
    sim.reference = SmoothStepReference{cfg.ref_start, cfg.ref_end, cfg.ref_t_start, cfg.ref_t_end};
    sim.noise = NoiseModel{cfg.sigma, cfg.seed};
    sim.h = cfg.h;
    sim.duration = cfg.duration;
    sim.y0 = cfg.y0;
    sim.scenario = cfg.name;
    sim.estimator = EstimatorConfig{2, cfg.alpha, cfg.t_filter, EstimatorVariant::DelayedInput, std::nullopt};
    return sim;
}

} // namespace detail

// Gains are tuned once on the nominal plant and frozen across delta.
[[nodiscard]] inline ControllerSpec ipd_controller(const ScenarioConfig& cfg) {
    const PdGains g = ipd_gains_from_target(expand_pole(cfg.ipd_pole, 2));
    return ControllerSpec{IpdGains{g.kp, g.kd}, cfg.alpha};
}

[[nodiscard]] inline ControllerSpec pid_controller(const ScenarioConfig& cfg) {
    const PidGains g = pid_gains_from_target(example_plant(), expand_pole(cfg.pid_pole, 3));
    return ControllerSpec{ClassicPidGains{g.kp, g.ki, g.kd}, cfg.alpha};
}

[[nodiscard]] inline std::string trace_file_name(const std::string& controller, double delta) {
    return "trace_" + controller + "_" + detail::format_number(delta) + ".csv";
}

[[nodiscard]] inline ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    ScenarioResult result;
    result.directory = cfg.out_dir / cfg.name;
    std::error_code ec;
    std::filesystem::create_directories(result.directory, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + result.directory.string() + ": " + ec.message());

    detail::MetricsWriter metrics;
    metrics.put("scenario", cfg.name);
    metrics.put("seed", std::to_string(cfg.seed));

    const auto emit_trace = [&](const SimulationTrace& trace, const std::string& label, double delta) {
        const auto path = result.directory / trace_file_name(label, delta);
        write_trace_csv(trace, path.string());
        result.files.push_back(path);
        return compute_metrics(trace);
    };

    if (cfg.name == "ipd-nominal" || cfg.name == "pid-nominal" || cfg.name == "ipd-delta" || cfg.name == "pid-delta" ||
        cfg.name == "compare") {
        std::vector<ControllerSpec> controllers;
        if (cfg.name != "pid-nominal" && cfg.name != "pid-delta")
            controllers.push_back(ipd_controller(cfg));
        if (cfg.name != "ipd-nominal" && cfg.name != "ipd-delta")
            controllers.push_back(pid_controller(cfg));

        CompareReport report;
        for (const auto& controller : controllers) {
            const PidGains g = controller.unified();
            metrics.put(controller.name() + ".kp", g.kp);
            metrics.put(controller.name() + ".ki", g.ki);
            metrics.put(controller.name() + ".kd", g.kd);
            if (controller.intelligent())
                metrics.put(controller.name() + ".alpha", controller.alpha);
        }
        for (double delta : cfg.resolved_deltas()) {
            for (const auto& controller : controllers) {
                auto sim = detail::base_simulation(cfg, delta);
                sim.controller = controller;
                const Metrics m = emit_trace(run_closed_loop(sim), controller.name(), delta);
                metrics.put_metrics(controller.name() + "_" + detail::format_number(delta), m);
                report.entries.push_back({controller.name(), delta, m});
            }
        }
        if (cfg.name == "compare") {
            report.winners = pick_winners(report.entries);
            for (const auto& [delta, who] : report.winners)
                metrics.put("winner_" + detail::format_number(delta), who);

            const auto path = result.directory / "report.csv";
            std::ofstream os(path, std::ios::binary);
            if (!os)
                throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
            os << "controller,delta,rmse,iae,tail_max_abs_error,diverged\n";
            for (const auto& e : report.entries)
                os << e.controller << ',' << detail::format_number(e.delta) << ',' << detail::format_number(e.metrics.rmse)
                   << ',' << detail::format_number(e.metrics.iae) << ','
                   << detail::format_number(e.metrics.tail_max_abs_error) << ',' << (e.metrics.diverged ? 1 : 0) << '\n';
            result.files.push_back(path);
        }
        result.compare = std::move(report);
    } else if (cfg.name == "ip-attempt") {
        CrossValidationOptions opt;
        opt.h = cfg.h;
        opt.duration = cfg.duration;
        opt.y0 = cfg.y0;

        const IpLoopParams naive{cfg.ip_alpha, cfg.ip_kp, cfg.t_filter};
        const auto naive_verdict = routh_hurwitz(ip_charpoly(naive));
        const Metrics naive_m = emit_trace(simulate_ip_cell(naive.kp, naive.alpha, naive.t_filter, opt), "ip-naive", 1.0);
        metrics.put("naive.alpha", naive.alpha);
        metrics.put("naive.kp", naive.kp);
        metrics.put("naive.t_filter", naive.t_filter);
        metrics.put("naive.routh", to_string(naive_verdict.kind));
        metrics.put("naive.max_real_part", max_real_part_of_roots(ip_charpoly(naive)));
        metrics.put_metrics("naive", naive_m);

        // Hurwitz counterpart: the stable cell of the fixed-T sweep with the
        // most negative max root real part.
        auto spec = cfg.grid_spec();
        spec.t_axis = {cfg.t_filter};
        spec.aggregation = Aggregation::FixedT;
        const StabilityGrid grid = sweep(spec);
        std::optional<IpLoopParams> best;
        double best_margin = 0.0;
        for (std::size_t i = 0; i < spec.kp_axis.count; ++i) {
            for (std::size_t j = 0; j < spec.alpha_axis.count; ++j) {
                if (grid.at(i, j) != CellVerdict::Stable)
                    continue;
                const IpLoopParams p{spec.alpha_axis.at(j), spec.kp_axis.at(i), cfg.t_filter};
                const double m = max_real_part_of_roots(ip_charpoly(p));
                if (!best || m < best_margin) {
                    best = p;
                    best_margin = m;
                }
            }
        }
        if (best) {
            const Metrics m = emit_trace(simulate_ip_cell(best->kp, best->alpha, best->t_filter, opt), "ip-hurwitz", 1.0);
            metrics.put("hurwitz.alpha", best->alpha);
            metrics.put("hurwitz.kp", best->kp);
            metrics.put("hurwitz.t_filter", best->t_filter);
            metrics.put("hurwitz.max_real_part", best_margin);
            metrics.put_metrics("hurwitz", m);
        } else {
            metrics.put("hurwitz", "none");
        }
    } else { // stabmap-fixed-t, stabmap-all-t
        const StabilityGrid grid = sweep(cfg.grid_spec());
        const auto path = result.directory / "grid.csv";
        export_grid(grid, path);
        result.files.push_back(path);
        result.files.push_back(grid_summary_path(path));
        result.stable_fraction = grid.stable_fraction;
        metrics.put("stable_fraction", grid.stable_fraction);
        metrics.put("stable_cells", std::to_string(grid.count(CellVerdict::Stable)));
        metrics.put("unstable_cells", std::to_string(grid.count(CellVerdict::Unstable)));
        metrics.put("marginal_cells", std::to_string(grid.count(CellVerdict::Marginal)));
        metrics.put("excluded_cells", std::to_string(grid.count(CellVerdict::Excluded)));
        if (grid.spec.aggregation == Aggregation::FixedT) {
            const AgreementReport xval = cross_validate(grid, cfg.xval_samples, cfg.seed);
            result.agreement_rate = xval.agreement_rate;
            metrics.put("agreement_rate", xval.agreement_rate);
            metrics.put("agreement_samples", std::to_string(xval.samples.size()));
            metrics.put("agreement_skipped_in_band", std::to_string(xval.skipped_in_band));
        }
    }

    const auto metrics_path = result.directory / "metrics.txt";
    metrics.write(metrics_path);
    result.files.push_back(metrics_path);
    return result;
}

} // namespace mfc
