#pragma once

#include "polysep/identify.hpp"
#include "polysep/recover.hpp"
#include "polysep/signalkit.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace polysep {

inline constexpr double noise_free_rel_tol = 1e-10;
inline constexpr double noisy_rel_tol = 1e-6;

struct PipelineConfig {
    DegreePlan plan{1, 1};
    Field field = Field::real;
    Scalar mu1{1.0}, mu2{1.0};
    std::size_t n = 1024;
    /// Unset: noise_free_rel_tol for separate(), per-level default in noise_sweep().
    std::optional<double> rel_tol;
    double k1_floor = default_k1_floor;
    IdentifyOptions identify;
    /// (Np, Nq) for both components; unset selects the polynomial fit.
    std::optional<std::pair<int, int>> rational;
    std::uint64_t seed = 0;
};

/// Throws SeparationError(InvalidSpec) on non-positive tolerances or n < 64.
void validate(const PipelineConfig& cfg);

/// Defaults matching a planted family: degree plan (1, 1), field and mu.
PipelineConfig config_for(const GeneratorSpec& plant, std::size_t n);

/// identify -> build_k -> vieta_extract -> fit -> recover_amplitudes.
/// Errors are rethrown with the failing stage name attached.
SeparationResult separate(const Signal& F, const PipelineConfig& cfg);

/// Trapezoid approximation of int_0^1 |F - a1 f1 - a2 f2|^2 dt with the
/// components solved by RK4 from the recovered generators.
double deviation_functional(const Signal& F, const SeparationResult& result);

/// max_j |p_hat_ij - p_ij| / max(1, |p_ij|), minimized over the component permutation.
double relative_parameter_error(const std::vector<double>& true1, const std::vector<double>& true2,
                                const std::vector<double>& est1, const std::vector<double>& est2);

struct ParamRange {
    double lo = 0.0, hi = 0.0;
    std::size_t steps = 1; ///< number of grid points; 1 means lo only

    double value(std::size_t k) const {
        return steps <= 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
    }
};

/// Ranges of (alpha1, beta1, alpha2, beta2).
using OracleRanges = std::array<ParamRange, 4>;

inline constexpr std::size_t oracle_budget = 10'000'000;

struct OracleResult {
    std::array<double, 4> best_params{};
    std::array<std::size_t, 4> best_index{};
    double best_value = 0.0;
    Scalar a1{}, a2{};
    std::size_t evaluated = 0;
};

/// Exhaustive grid minimization of the deviation functional over the family
/// parameters; amplitudes are profiled out exactly at every grid point.
/// Throws SeparationError(BudgetExceeded) beyond oracle_budget points.
OracleResult brute_force_oracle(const Signal& F, const OracleRanges& ranges, Family family);

struct LevelStats {
    double level = 0.0;
    std::size_t trials = 0;
    std::size_t completed = 0;      ///< trials that finished without a stage error
    std::size_t failures = 0;       ///< stage errors plus completed trials with error > 0.5
    double median_err = 0.0;        ///< over completed trials
    double p90_err = 0.0;           ///< nearest-rank, over completed trials
    double fail_rate = 0.0;
    std::vector<double> errors;     ///< completed trials, sorted
    std::map<std::string, std::size_t> stage_failures;
};

struct SweepReport {
    std::vector<LevelStats> levels;
    double runtime_seconds = 0.0;
};

inline constexpr double failure_error = 0.5;

/// Per-trial seed derived from the root seed, independent of execution order.
std::uint64_t trial_seed(std::uint64_t root, std::size_t level_index, std::size_t trial);

/// Monte-Carlo robustness sweep: for each noise level and trial, add noise to
/// the planted signal, separate, and score against the planted generators.
/// threads = 0 uses the hardware concurrency.
SweepReport noise_sweep(const GeneratorSpec& plant, const PipelineConfig& cfg,
                        const std::vector<double>& noise_levels, std::size_t trials,
                        unsigned threads = 0);

} // namespace polysep
