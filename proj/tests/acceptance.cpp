// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfc/polynomial.hpp"
#include "mfc/scenario.hpp"
#include "mfc/simulation.hpp"
#include "mfc/stability_map.hpp"

namespace {

namespace fs = std::filesystem;
using namespace mfc;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// 1. Routh verdict agrees with the companion-matrix root oracle.
Outcome routh_oracle() {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> degree(1, 6);
    std::uniform_real_distribution<double> coeff(-10.0, 10.0);
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t mismatches = 0;
    while (checked < 10000) {
        std::vector<double> c(static_cast<std::size_t>(degree(rng)) + 1);
        for (double& x : c)
            x = coeff(rng);
        const Polynomial p(c);
        if (p.degree() < 1) {
            ++skipped;
            continue;
        }
        const double m = max_real_part_of_roots(p);
        if (std::abs(m) <= 1e-6) {
            ++skipped;
            continue;
        }
        const bool hurwitz = routh_hurwitz(p).kind == StabilityKind::Hurwitz;
        mismatches += hurwitz != (m < 0.0) ? 1 : 0;
        ++checked;
    }
    return {mismatches == 0, std::to_string(checked) + " polynomials, " + std::to_string(mismatches) + " mismatches, " +
                                 std::to_string(skipped) + " in margin band"};
}

// 2. kp * alpha >= 0 and large filter constants are never stable.
Outcome quartic_necessary_conditions() {
    const GridSpec spec = default_fixed_t_grid();
    const StabilityGrid grid = sweep(spec);
    std::size_t same_sign_stable = 0;
    for (std::size_t i = 0; i < spec.kp_axis.count; ++i)
        for (std::size_t j = 0; j < spec.alpha_axis.count; ++j)
            if (grid.at(i, j) == CellVerdict::Stable && spec.kp_axis.at(i) * spec.alpha_axis.at(j) >= 0.0)
                ++same_sign_stable;

    GridSpec large = spec;
    large.t_axis = {2.0, 3.0, 5.0};
    std::size_t large_t_stable = 0;
    for (std::size_t idx = 0; idx < large.t_axis.size(); ++idx) {
        large.fixed_t_index = idx;
        large_t_stable += sweep(large).count(CellVerdict::Stable);
    }
    return {same_sign_stable == 0 && large_t_stable == 0,
            "stable cells with kp*alpha >= 0: " + std::to_string(same_sign_stable) +
                ", stable cells for T in {2,3,5}: " + std::to_string(large_t_stable)};
}

// 3. alpha = -1 is never stable, confirmed on sampled cells by the roots.
Outcome alpha_minus_one() {
    std::size_t stable = 0;
    for (const GridSpec& spec : {default_fixed_t_grid(), default_for_all_t_grid()}) {
        const StabilityGrid grid = sweep(spec);
        const std::size_t j = 80;
        if (spec.alpha_axis.at(j) != -1.0)
            return {false, "alpha axis index 80 is not -1"};
        for (std::size_t i = 0; i < spec.kp_axis.count; ++i)
            stable += grid.at(i, j) == CellVerdict::Stable ? 1 : 0;
    }
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> kp(-5.0, 5.0);
    std::uniform_real_distribution<double> log_t(std::log(1e-3), std::log(1.9));
    std::size_t root_confirmed = 0;
    for (int s = 0; s < 20; ++s)
        root_confirmed += max_real_part_of_roots(ip_charpoly({-1.0, kp(rng), std::exp(log_t(rng))})) >= 0.0 ? 1 : 0;
    return {stable == 0 && root_confirmed == 20, "stable cells on alpha = -1 row: " + std::to_string(stable) +
                                                      ", root oracle confirms " + std::to_string(root_confirmed) + "/20"};
}

// 4. Stable region is narrow, and requiring all T can only shrink it.
Outcome narrowness() {
    const double fixed = sweep(default_fixed_t_grid()).stable_fraction;
    const double all_t = sweep(default_for_all_t_grid()).stable_fraction;
    return {fixed > 0.0 && fixed < 0.25 && all_t <= fixed,
            "stable_fraction T=0.1: " + fmt("%.6g", fixed) + ", for all T: " + fmt("%.6g", all_t)};
}

// 5. Routh verdicts agree with simulated boundedness.
Outcome cross_validation() {
    const AgreementReport r = cross_validate(sweep(default_fixed_t_grid()), 50, 2024);
    return {r.samples.size() == 50 && r.agreement_rate >= 0.9,
            "agreement " + fmt("%.3f", r.agreement_rate) + " on " + std::to_string(r.samples.size()) + " samples (" +
                std::to_string(r.skipped_in_band) + " skipped in band)"};
}

// 6. Pole placement reproduces the published gains.
Outcome pole_placement() {
    const PdGains pd = ipd_gains_from_target(expand_pole(0.5, 2));
    const PidGains pid = pid_gains_from_target(example_plant(), expand_pole(0.66, 3));
    const auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
    const double worst = std::max({rel(pid.kp, 1.3068), rel(pid.ki, 0.287496), rel(pid.kd, 2.98)});
    return {pd.kp == 0.25 && pd.kd == 1.0 && worst <= 1e-9,
            "iPD (" + fmt("%.12g", pd.kp) + ", " + fmt("%.12g", pd.kd) + "), PID max relative error " + fmt("%.3g", worst)};
}

// 7. iPD nominal tracking, and exact error dynamics with an oracle estimator.
Outcome ipd_nominal() {
    ScenarioConfig sc;
    sc.name = "ipd-nominal";
    SimulationConfig cfg = detail::base_simulation(sc, 1.0);
    cfg.controller = ipd_controller(sc);
    const Metrics m = compute_metrics(run_closed_loop(cfg));

    cfg.noise.sigma = 0.0;
    cfg.oracle_estimator = true;
    cfg.reference = ConstantReference{0.0};
    const SimulationTrace trace = run_closed_loop(cfg);
    const double e0 = trace.e.front();
    const double edot0 = -cfg.ydot0;
    double deviation = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const double t = trace.t[k];
        const double analytic = (e0 + (edot0 + 0.5 * e0) * t) * std::exp(-0.5 * t);
        deviation = std::max(deviation, std::abs(trace.e[k] - analytic));
    }
    return {!m.diverged && m.tail_max_abs_error <= 5.0 * sc.sigma && !trace.diverged && deviation <= 1e-4,
            "tail " + fmt("%.4g", m.tail_max_abs_error) + " (limit " + fmt("%.4g", 5.0 * sc.sigma) + "), oracle deviation " +
                fmt("%.3g", deviation)};
}

// 8. iPD degrades less than PID as actuator effectiveness drops.
Outcome robustness_ordering() {
    const auto mean_tail = [](const ControllerSpec& controller, double delta) {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ScenarioConfig sc;
            sc.name = "compare";
            sc.seed = seed;
            SimulationConfig cfg = detail::base_simulation(sc, delta);
            cfg.controller = controller;
            sum += compute_metrics(run_closed_loop(cfg)).tail_max_abs_error;
        }
        return sum / 10.0;
    };
    const ScenarioConfig sc;
    const ControllerSpec ipd = ipd_controller(sc);
    const ControllerSpec pid = pid_controller(sc);
    const double ipd_08 = mean_tail(ipd, 0.8);
    const double pid_08 = mean_tail(pid, 0.8);
    const double ipd_05 = mean_tail(ipd, 0.5);
    const double pid_05 = mean_tail(pid, 0.5);
    const double ratio_08 = pid_08 / ipd_08;
    const double ratio_05 = pid_05 / ipd_05;
    return {ipd_08 <= pid_08 && ratio_05 > ratio_08, "delta=0.8 iPD " + fmt("%.4g", ipd_08) + " PID " + fmt("%.4g", pid_08) +
                                                         ", PID/iPD ratio 0.8: " + fmt("%.3f", ratio_08) +
                                                         ", 0.5: " + fmt("%.3f", ratio_05)};
}

// 9. Delayed-input estimator tracks the true lumped term after 10 T.
Outcome estimator_convergence() {
    const PidGains g = pid_gains_from_target(example_plant(), expand_pole(0.66, 3));
    const double t_filter = 0.1;
    double worst_excess = -1.0;
    std::string where;
    for (int nu : {1, 2})
        for (double alpha : {0.5, 1.0, 2.0}) {
            SimulationConfig cfg;
            cfg.controller = ControllerSpec{ClassicPidGains{g.kp, g.ki, g.kd}, alpha};
            cfg.estimator = EstimatorConfig{nu, alpha, t_filter, EstimatorVariant::DelayedInput, std::nullopt};
            cfg.reference = ConstantReference{0.0};
            cfg.noise = NoiseModel{0.0, 0};
            const SimulationTrace trace = run_closed_loop(cfg);
            if (trace.diverged)
                return {false, "loop diverged for nu=" + std::to_string(nu) + " alpha=" + fmt("%g", alpha)};
            for (std::size_t k = 0; k < trace.size(); ++k) {
                if (trace.t[k] < 10.0 * t_filter)
                    continue;
                const double excess =
                    std::abs(trace.f_hat[k] - trace.f_true[k]) - (0.05 + 0.05 * std::abs(trace.f_true[k]));
                if (excess > worst_excess) {
                    worst_excess = excess;
                    where = "nu=" + std::to_string(nu) + " alpha=" + fmt("%g", alpha) + " t=" + fmt("%g", trace.t[k]);
                }
            }
        }
    return {worst_excess <= 0.0, "worst margin use " + fmt("%.3g", worst_excess) + " at " + where};
}

// 10. Re-running scenarios with the same seed gives identical artifacts.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "mfc_acceptance_determinism";
    fs::remove_all(root);
    std::size_t compared = 0;
    std::size_t differing = 0;
    for (const char* name : {"ipd-nominal", "compare", "ip-attempt", "stabmap-fixed-t"}) {
        std::vector<std::vector<fs::path>> files;
        for (const char* run : {"a", "b"}) {
            ConfigOverrides flags;
            flags.scenario = name;
            flags.out_dir = root / run;
            flags.seed = 11;
            ScenarioConfig cfg = parse_config(std::nullopt, flags);
            cfg.xval_samples = 10;
            files.push_back(run_scenario(cfg).files);
        }
        if (files[0].size() != files[1].size())
            return {false, std::string(name) + " produced different file sets"};
        for (std::size_t i = 0; i < files[0].size(); ++i) {
            ++compared;
            differing += read_file(files[0][i]) != read_file(files[1][i]) ? 1 : 0;
        }
    }
    fs::remove_all(root);
    return {compared > 0 && differing == 0,
            std::to_string(compared) + " artifacts compared, " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> check;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {"routh oracle equivalence", routh_oracle, 10.0},
        {"quartic necessary conditions", quartic_necessary_conditions, 30.0},
        {"alpha = -1 never stable", alpha_minus_one, 5.0},
        {"narrow stable region", narrowness, 60.0},
        {"cross-validation against simulation", cross_validation, 120.0},
        {"pole placement exactness", pole_placement, 0.0},
        {"iPD nominal tracking", ipd_nominal, 0.0},
        {"robustness ordering", robustness_ordering, 0.0},
        {"estimator convergence", estimator_convergence, 0.0},
        {"determinism", determinism, 0.0},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_s > 0.0 && elapsed > c.budget_s) {
            out.pass = false;
            out.detail += "; over time budget";
        }
        failures += out.pass ? 0 : 1;
        std::printf("[%s] %2zu. %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", i + 1, c.name, out.detail.c_str(), elapsed);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
