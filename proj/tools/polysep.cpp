// polysep: separate a two-component signal whose components solve first-order
// ODEs with polynomial coefficients.
//
//   polysep generate --family gaussian --params 3,1,1,-2 --amps 1,1 --n 2049 --out f.csv
//   polysep separate --in f.csv --n1 1 --n2 1 --field real --mu 1 --out result.json
//   polysep sweep --family gaussian --params 3,1,1,-2 --levels 0.05,0.10 --trials 100 --out report.csv
//   polysep oracle --in f.csv --family gaussian --ranges 2.4:3.6:11,0.8:1.2:11,0.8:1.2:11,-2.4:-1.6:11
//
// Exit codes: 0 success, 2 input-format error, 3 pipeline stage error, 4 budget exceeded.

#include "polysep/error.hpp"
#include "polysep/harness.hpp"
#include "polysep/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace polysep;

namespace {

constexpr int exit_input = 2;
constexpr int exit_stage = 3;
constexpr int exit_budget = 4;

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw SeparationError(ErrorCode::InputFormat, std::string("bad number in ") + what + ": '" + cell + "'");
        }
    }
    return out;
}

Family parse_family(const std::string& s) {
    if (s == "gaussian") return Family::gaussian;
    if (s == "lfm" || s == "lfm_chirp") return Family::lfm_chirp;
    throw SeparationError(ErrorCode::InputFormat, "unknown family '" + s + "'");
}

// --params alpha1,beta1,alpha2,beta2 and --amps a1,a2
GeneratorSpec make_plant(const std::string& family, const std::string& params, const std::string& amps) {
    GeneratorSpec spec;
    spec.family = parse_family(family);
    const auto p = parse_list(params, "--params");
    if (p.size() != 4) throw SeparationError(ErrorCode::InputFormat, "--params needs alpha1,beta1,alpha2,beta2");
    spec.params1 = {p[0], p[1]};
    spec.params2 = {p[2], p[3]};
    const auto a = parse_list(amps, "--amps");
    if (a.size() != 2) throw SeparationError(ErrorCode::InputFormat, "--amps needs a1,a2");
    spec.a1 = a[0];
    spec.a2 = a[1];
    spec.field = field_of(spec);
    return spec;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SeparationError(ErrorCode::InputFormat, "cannot write " + path);
    return out;
}

ParamRange parse_range(const std::string& s) {
    std::stringstream ss(s);
    std::string lo, hi, steps;
    if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, steps))
        throw SeparationError(ErrorCode::InputFormat, "range must be lo:hi:steps, got '" + s + "'");
    try {
        return {std::stod(lo), std::stod(hi), static_cast<std::size_t>(std::stoul(steps))};
    } catch (const std::exception&) {
        throw SeparationError(ErrorCode::InputFormat, "range must be lo:hi:steps, got '" + s + "'");
    }
}

Quadrature parse_quadrature(const std::string& s) {
    return s == "cubic" ? Quadrature::cubic : Quadrature::trapezoid;
}

int exit_code_for(const SeparationError& e) {
    switch (e.code()) {
    case ErrorCode::InputFormat:
    case ErrorCode::InvalidSpec: return exit_input;
    case ErrorCode::BudgetExceeded: return exit_budget;
    default: return exit_stage;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-component separation for first-order polynomial-coefficient ODE signals"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a planted test signal");
    std::string g_family = "gaussian", g_params, g_amps = "1,1", g_out;
    std::size_t g_n = 2049;
    double g_noise = 0.0;
    std::uint64_t g_seed = 0;
    gen->add_option("--family", g_family, "gaussian | lfm")->check(CLI::IsMember({"gaussian", "lfm", "lfm_chirp"}));
    gen->add_option("--params", g_params, "alpha1,beta1,alpha2,beta2")->required();
    gen->add_option("--amps", g_amps, "a1,a2");
    gen->add_option("--n", g_n, "grid size");
    gen->add_option("--noise", g_noise, "relative noise level");
    gen->add_option("--seed", g_seed, "noise seed");
    gen->add_option("--out", g_out, "output CSV")->required();

    // separate
    auto* sep = app.add_subcommand("separate", "Recover generators and amplitudes from a signal");
    std::string s_in, s_out, s_field = "real", s_mu = "1", s_rational, s_gauge = "auto", s_quad = "trapezoid";
    int s_n1 = 1, s_n2 = 1;
    std::optional<double> s_tol;
    double s_floor = default_k1_floor;
    sep->add_option("--in", s_in, "input CSV")->required();
    sep->add_option("--n1", s_n1, "degree of the first generator");
    sep->add_option("--n2", s_n2, "degree of the second generator");
    sep->add_option("--field", s_field, "real | complex")->check(CLI::IsMember({"real", "complex"}));
    sep->add_option("--mu", s_mu, "generator scale: 1 | i")->check(CLI::IsMember({"1", "i"}));
    sep->add_option("--rational", s_rational, "Np,Nq for the rational second step");
    sep->add_option("--tol", s_tol, "relative singular-value truncation");
    sep->add_option("--k1-floor", s_floor, "relative K1 masking threshold");
    sep->add_option("--gauge", s_gauge, "auto | l0 | homogeneous")
        ->check(CLI::IsMember({"auto", "l0", "homogeneous"}));
    sep->add_option("--quadrature", s_quad, "running-integral rule: trapezoid | cubic")
        ->check(CLI::IsMember({"trapezoid", "cubic"}));
    sep->add_option("--out", s_out, "output JSON")->required();

    // sweep
    auto* swp = app.add_subcommand("sweep", "Monte-Carlo noise robustness sweep");
    std::string w_family = "gaussian", w_params, w_amps = "1,1", w_levels = "0.02,0.05,0.10,0.15", w_out;
    std::string w_quad = "trapezoid";
    std::size_t w_n = 1024, w_trials = 100;
    std::uint64_t w_seed = 0;
    std::optional<double> w_tol;
    unsigned w_threads = 0;
    swp->add_option("--family", w_family, "gaussian | lfm")->check(CLI::IsMember({"gaussian", "lfm", "lfm_chirp"}));
    swp->add_option("--params", w_params, "alpha1,beta1,alpha2,beta2")->required();
    swp->add_option("--amps", w_amps, "a1,a2");
    swp->add_option("--n", w_n, "grid size");
    swp->add_option("--levels", w_levels, "comma-separated relative noise levels");
    swp->add_option("--trials", w_trials, "trials per level");
    swp->add_option("--seed", w_seed, "root seed");
    swp->add_option("--tol", w_tol, "relative singular-value truncation");
    swp->add_option("--threads", w_threads, "worker threads (0 = all cores)");
    swp->add_option("--quadrature", w_quad, "running-integral rule: trapezoid | cubic")
        ->check(CLI::IsMember({"trapezoid", "cubic"}));
    swp->add_option("--out", w_out, "output CSV")->required();

    // oracle
    auto* orc = app.add_subcommand("oracle", "Brute-force grid minimization of the deviation functional");
    std::string o_in, o_family = "gaussian", o_ranges, o_out;
    orc->add_option("--in", o_in, "input CSV")->required();
    orc->add_option("--family", o_family, "gaussian | lfm")->check(CLI::IsMember({"gaussian", "lfm", "lfm_chirp"}));
    orc->add_option("--ranges", o_ranges, "lo:hi:steps for alpha1,beta1,alpha2,beta2")->required();
    orc->add_option("--out", o_out, "output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_input;
    }

    try {
        if (*gen) {
            const GeneratorSpec spec = make_plant(g_family, g_params, g_amps);
            Signal F = generate(spec, Grid(g_n)).F;
            F = add_noise(F, g_noise, g_seed);
            auto out = open_out(g_out);
            io::write_signal_csv(out, F);
        } else if (*sep) {
            Signal F = io::read_signal_csv(s_in);
            PipelineConfig cfg;
            cfg.plan = DegreePlan(s_n1, s_n2);
            cfg.field = s_field == "complex" ? Field::complex : Field::real;
            cfg.mu1 = cfg.mu2 = s_mu == "i" ? Scalar{0.0, 1.0} : Scalar{1.0};
            cfg.n = std::max<std::size_t>(F.size(), 64);
            cfg.rel_tol = s_tol;
            cfg.k1_floor = s_floor;
            cfg.identify.gauge = s_gauge == "l0"            ? GaugePolicy::L0_unit
                                 : s_gauge == "homogeneous" ? GaugePolicy::homogeneous
                                                            : GaugePolicy::automatic;
            cfg.identify.quadrature = parse_quadrature(s_quad);
            if (!s_rational.empty()) {
                const auto r = parse_list(s_rational, "--rational");
                if (r.size() != 2) throw SeparationError(ErrorCode::InputFormat, "--rational needs Np,Nq");
                cfg.rational = std::pair{static_cast<int>(r[0]), static_cast<int>(r[1])};
            }
            if (cfg.field == Field::real && F.field() == Field::complex) {
                for (auto z : F.samples())
                    if (z.imag() != 0.0)
                        throw SeparationError(ErrorCode::InputFormat, "imaginary samples in a real-field run");
                F = Signal(F.grid(), {F.samples().begin(), F.samples().end()}, Field::real);
            }
            if (F.size() < 64) throw SeparationError(ErrorCode::InputFormat, "separation needs at least 64 samples");
            const SeparationResult r = separate(F, cfg);
            auto out = open_out(s_out);
            out << io::to_json(r).dump(2) << '\n';
        } else if (*swp) {
            const GeneratorSpec plant = make_plant(w_family, w_params, w_amps);
            PipelineConfig cfg = config_for(plant, w_n);
            cfg.rel_tol = w_tol;
            cfg.seed = w_seed;
            cfg.identify.quadrature = parse_quadrature(w_quad);
            const auto levels = parse_list(w_levels, "--levels");
            const SweepReport report = noise_sweep(plant, cfg, levels, w_trials, w_threads);
            auto out = open_out(w_out);
            io::write_report_csv(out, report);
            std::cerr << "sweep: " << levels.size() * w_trials << " trials in " << report.runtime_seconds
                      << " s\n";
        } else if (*orc) {
            const Signal F = io::read_signal_csv(o_in);
            std::vector<std::string> parts;
            std::stringstream ss(o_ranges);
            for (std::string cell; std::getline(ss, cell, ',');) parts.push_back(cell);
            if (parts.size() != 4)
                throw SeparationError(ErrorCode::InputFormat, "--ranges needs four lo:hi:steps entries");
            OracleRanges ranges;
            for (std::size_t d = 0; d < 4; ++d) ranges[d] = parse_range(parts[d]);
            const OracleResult r = brute_force_oracle(F, ranges, parse_family(o_family));
            auto out = open_out(o_out);
            out << io::to_json(r).dump(2) << '\n';
        }
    } catch (const SeparationError& e) {
        std::cerr << "polysep: " << to_string(e.code());
        if (!e.stage().empty()) std::cerr << " [stage " << e.stage() << "]";
        std::cerr << ": " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}
