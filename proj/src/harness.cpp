#include "polysep/harness.hpp"

#include "polysep/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace polysep {

namespace {

template <class Fn>
auto run_stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const SeparationError& e) {
        throw e.with_stage(e.stage().empty() ? name : e.stage());
    }
}

void require_finite(const Polynomial& p, const char* what) {
    for (auto c : p.coeffs())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw SeparationError(ErrorCode::NonFinite, std::string(what) + " has non-finite coefficients");
}

void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw SeparationError(ErrorCode::NonFinite, std::string(what) + " is not finite");
}

void require_finite(Scalar v, const char* what) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw SeparationError(ErrorCode::NonFinite, std::string(what) + " is not finite");
}

std::vector<double> trapezoid_weights(const Grid& grid) {
    std::vector<double> w(grid.size(), grid.step());
    w.front() = w.back() = 0.5 * grid.step();
    return w;
}

double weighted_deviation(const Signal& F, const Signal& b1, const Signal& b2, Scalar a1, Scalar a2,
                          const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t m = 0; m < F.size(); ++m) acc += w[m] * std::norm(F[m] - a1 * b1[m] - a2 * b2[m]);
    return acc;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double percentile_nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

double median(const std::vector<double>& sorted) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

} // namespace

void validate(const PipelineConfig& cfg) {
    if (cfg.n < 64) throw SeparationError(ErrorCode::InvalidSpec, "pipeline grid needs n >= 64");
    if (cfg.rel_tol && !(*cfg.rel_tol > 0.0 && *cfg.rel_tol < 1.0))
        throw SeparationError(ErrorCode::InvalidSpec, "rel_tol must lie in (0, 1)");
    if (!(cfg.k1_floor > 0.0 && cfg.k1_floor < 1.0))
        throw SeparationError(ErrorCode::InvalidSpec, "k1_floor must lie in (0, 1)");
    if (!(cfg.identify.gauge_failure_threshold > 0.0))
        throw SeparationError(ErrorCode::InvalidSpec, "gauge failure threshold must be positive");
    if (cfg.field == Field::real && (cfg.mu1.imag() != 0.0 || cfg.mu2.imag() != 0.0))
        throw SeparationError(ErrorCode::InvalidSpec, "complex generator scale requires the complex field");
    if (cfg.rational && (cfg.rational->first < 0 || cfg.rational->second < 0))
        throw SeparationError(ErrorCode::InvalidSpec, "rational degrees must be nonnegative");
}

PipelineConfig config_for(const GeneratorSpec& plant, std::size_t n) {
    PipelineConfig cfg;
    const auto p1 = generator_coefficients(plant, 1), p2 = generator_coefficients(plant, 2);
    const int d1 = static_cast<int>(p1.size()) - 1, d2 = static_cast<int>(p2.size()) - 1;
    cfg.plan = DegreePlan(std::max(d1, d2), std::min(d1, d2));
    cfg.field = field_of(plant);
    cfg.mu1 = cfg.mu2 = generator_scale(plant);
    cfg.n = n;
    return cfg;
}

SeparationResult separate(const Signal& input, const PipelineConfig& cfg) {
    validate(cfg);
    if (cfg.field == Field::real && input.field() == Field::complex)
        throw SeparationError(ErrorCode::InvalidSpec, "complex signal given to a real-field run", "input");
    const Signal F = cfg.field == Field::complex && input.field() == Field::real
                         ? Signal(input.grid(), {input.samples().begin(), input.samples().end()}, Field::complex)
                         : input;
    const double rel_tol = cfg.rel_tol.value_or(noise_free_rel_tol);

    const OdeCoefficients ode = run_stage("identify", [&] {
        OdeCoefficients c = identify_ode(F, cfg.plan, rel_tol, cfg.identify);
        require_finite(c.A, "A");
        require_finite(c.B, "B");
        require_finite(c.C, "C");
        return c;
    });
    const KFunctions k = run_stage("build_k", [&] { return build_k(ode); });
    const VietaSamples v =
        run_stage("vieta_extract", [&] { return vieta_extract(k, F.grid(), cfg.k1_floor, cfg.field); });

    SeparationResult result;
    result.mu1 = cfg.mu1;
    result.mu2 = cfg.mu2;
    run_stage("fit_generators", [&] {
        if (cfg.rational) {
            const auto [np, nq] = *cfg.rational;
            RationalFit fit = fit_rational_generators(v, np, nq, np, nq, cfg.mu1, cfg.mu2);
            result.p1 = std::move(fit.p1);
            result.p2 = std::move(fit.p2);
            result.q1 = std::move(fit.q1);
            result.q2 = std::move(fit.q2);
            result.fit_residuals = fit.residuals;
            result.labeling = std::move(fit.labeling);
        } else {
            PolynomialFit fit = fit_polynomial_generators(v, cfg.plan.n1(), cfg.plan.n2(), cfg.mu1, cfg.mu2);
            result.p1 = std::move(fit.p1);
            result.p2 = std::move(fit.p2);
            result.fit_residuals = fit.residuals;
            result.labeling = std::move(fit.labeling);
        }
        require_finite(result.p1, "p1");
        require_finite(result.p2, "p2");
        if (result.q1) require_finite(*result.q1, "q1");
        if (result.q2) require_finite(*result.q2, "q2");
        return 0;
    });
    result.permutation_note = result.labeling.note;

    const AmplitudeFit amps = run_stage("recover_amplitudes", [&] {
        AmplitudeFit a = recover_amplitudes(F, result.generator(1), result.generator(2));
        require_finite(a.a1, "a1");
        require_finite(a.a2, "a2");
        return a;
    });
    result.a1 = amps.a1;
    result.a2 = amps.a2;
    result.reconstruction_residual = amps.residual;

    auto& d = result.diagnostics;
    d.gauge = ode.gauge;
    d.identify = ode.diagnostics;
    d.widened_b = ode.widened_b;
    d.valid_fraction = static_cast<double>(v.valid_count()) / static_cast<double>(F.size());
    d.clamped_nodes = static_cast<std::size_t>(std::count(v.clamped.begin(), v.clamped.end(), true));
    d.k1_segments = v.segment_count();
    d.amplitude_gram_condition = amps.gram_condition;
    return result;
}

double deviation_functional(const Signal& F, const SeparationResult& result) {
    const Field field = F.field() == Field::complex || result.mu1.imag() != 0.0 || result.mu2.imag() != 0.0
                            ? Field::complex
                            : Field::real;
    const Signal b1 = rk4_solve(result.generator(1), F.grid(), field);
    const Signal b2 = rk4_solve(result.generator(2), F.grid(), field);
    return weighted_deviation(F, b1, b2, result.a1, result.a2, trapezoid_weights(F.grid()));
}

double relative_parameter_error(const std::vector<double>& true1, const std::vector<double>& true2,
                                const std::vector<double>& est1, const std::vector<double>& est2) {
    auto err = [](const std::vector<double>& truth, const std::vector<double>& est) {
        const std::size_t len = std::max(truth.size(), est.size());
        double worst = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            const double p = j < truth.size() ? truth[j] : 0.0;
            const double q = j < est.size() ? est[j] : 0.0;
            worst = std::max(worst, std::abs(q - p) / std::max(1.0, std::abs(p)));
        }
        return worst;
    };
    const double direct = std::max(err(true1, est1), err(true2, est2));
    const double swapped = std::max(err(true1, est2), err(true2, est1));
    return std::min(direct, swapped);
}

OracleResult brute_force_oracle(const Signal& F, const OracleRanges& ranges, Family family) {
    if (family == Family::custom)
        throw SeparationError(ErrorCode::InvalidSpec, "oracle needs the gaussian or lfm_chirp family");
    double total = 1.0;
    for (const auto& r : ranges) {
        if (r.steps == 0) throw SeparationError(ErrorCode::InvalidSpec, "oracle range needs at least one step");
        total *= static_cast<double>(r.steps);
    }
    if (total > static_cast<double>(oracle_budget))
        throw SeparationError(ErrorCode::BudgetExceeded, "oracle grid exceeds the evaluation budget");

    const Grid& grid = F.grid();
    const Field field = family == Family::lfm_chirp ? Field::complex : Field::real;
    const Signal target = field == Field::complex && F.field() == Field::real
                              ? Signal(grid, {F.samples().begin(), F.samples().end()}, Field::complex)
                              : F;

    // Component bases depend on one (alpha, beta) pair each; solve them once.
    auto bases = [&](const ParamRange& ra, const ParamRange& rb) {
        std::vector<std::optional<Signal>> out;
        for (std::size_t i = 0; i < ra.steps; ++i) {
            for (std::size_t j = 0; j < rb.steps; ++j) {
                GeneratorSpec g;
                g.family = family;
                g.params1 = {ra.value(i), rb.value(j)};
                try {
                    out.emplace_back(rk4_solve(Generator{generator_polynomial(g, 1)}, grid, field));
                } catch (const SeparationError&) {
                    out.emplace_back(std::nullopt);
                }
            }
        }
        return out;
    };
    const auto first = bases(ranges[0], ranges[1]);
    const auto second = bases(ranges[2], ranges[3]);
    const auto w = trapezoid_weights(grid);

    OracleResult best;
    best.best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (!first[i]) continue;
        for (std::size_t j = 0; j < second.size(); ++j) {
            if (!second[j]) continue;
            AmplitudeFit amps;
            try {
                amps = fit_amplitudes(target, *first[i], *second[j]);
            } catch (const SeparationError&) {
                continue;
            }
            ++best.evaluated;
            const double omega = weighted_deviation(target, *first[i], *second[j], amps.a1, amps.a2, w);
            if (omega < best.best_value) {
                best.best_value = omega;
                best.best_index = {i / ranges[1].steps, i % ranges[1].steps, j / ranges[3].steps,
                                   j % ranges[3].steps};
                best.a1 = amps.a1;
                best.a2 = amps.a2;
            }
        }
    }
    for (std::size_t d = 0; d < 4; ++d) best.best_params[d] = ranges[d].value(best.best_index[d]);
    return best;
}

std::uint64_t trial_seed(std::uint64_t root, std::size_t level_index, std::size_t trial) {
    return splitmix64(splitmix64(splitmix64(root) ^ level_index) ^ trial);
}

SweepReport noise_sweep(const GeneratorSpec& plant, const PipelineConfig& cfg,
                        const std::vector<double>& noise_levels, std::size_t trials, unsigned threads) {
    if (trials == 0) throw SeparationError(ErrorCode::InvalidSpec, "sweep needs at least one trial");
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();

    const Signal clean = generate(plant, Grid(cfg.n)).F;
    const auto truth1 = generator_coefficients(plant, 1);
    const auto truth2 = generator_coefficients(plant, 2);

    struct Outcome {
        bool completed = false;
        double error = 0.0;
        std::string stage;
    };
    const std::size_t jobs = noise_levels.size() * trials;
    std::vector<Outcome> outcomes(jobs);

    auto run_job = [&](std::size_t job) {
        const std::size_t li = job / trials, trial = job % trials;
        const double level = noise_levels[li];
        Outcome& out = outcomes[job];
        try {
            PipelineConfig local = cfg;
            local.rel_tol = cfg.rel_tol.value_or(level > 0.0 ? noisy_rel_tol : noise_free_rel_tol);
            const Signal noisy = add_noise(clean, level, trial_seed(cfg.seed, li, trial));
            const SeparationResult r = separate(noisy, local);
            out.error = relative_parameter_error(truth1, truth2, r.p1, r.p2);
            out.completed = std::isfinite(out.error);
            if (!out.completed) out.stage = "score";
        } catch (const SeparationError& e) {
            out.stage = e.stage().empty() ? "noise" : e.stage();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    if (threads <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
            });
    }

    SweepReport report;
    for (std::size_t li = 0; li < noise_levels.size(); ++li) {
        LevelStats s;
        s.level = noise_levels[li];
        s.trials = trials;
        for (std::size_t trial = 0; trial < trials; ++trial) {
            const Outcome& o = outcomes[li * trials + trial];
            if (o.completed) {
                ++s.completed;
                s.errors.push_back(o.error);
                if (o.error > failure_error) ++s.failures;
            } else {
                ++s.failures;
                ++s.stage_failures[o.stage];
            }
        }
        std::sort(s.errors.begin(), s.errors.end());
        s.median_err = median(s.errors);
        s.p90_err = percentile_nearest_rank(s.errors, 0.9);
        s.fail_rate = static_cast<double>(s.failures) / static_cast<double>(trials);
        report.levels.push_back(std::move(s));
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace polysep
