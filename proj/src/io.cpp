#include "polysep/io.hpp"

#include "polysep/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace polysep::io {

namespace {

[[noreturn]] void format_error(const std::string& what) {
    throw SeparationError(ErrorCode::InputFormat, what, "input");
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        format_error("line " + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json scalar_json(Scalar z) { return {{"re", z.real()}, {"im", z.imag()}}; }

} // namespace

Signal read_signal_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    do {
        if (!std::getline(in, line)) format_error("empty signal file");
        ++lineno;
    } while (trim(line).empty());

    const auto header = split(line);
    bool has_im = false;
    if (header.size() == 2 && header[0] == "t" && header[1] == "re") {
        has_im = false;
    } else if (header.size() == 3 && header[0] == "t" &&
               ((header[1] == "re" && header[2] == "im") || (header[1] == "c0" && header[2] == "c1"))) {
        has_im = true;
    } else {
        format_error("expected header 't,re', 't,re,im' or 't,c0,c1'");
    }

    std::vector<double> t;
    std::vector<Scalar> values;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            format_error("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                         " columns");
        t.push_back(parse_number(cells[0], lineno));
        const double re = parse_number(cells[1], lineno);
        const double im = has_im ? parse_number(cells[2], lineno) : 0.0;
        if (!std::isfinite(re) || !std::isfinite(im))
            format_error("line " + std::to_string(lineno) + ": non-finite sample");
        values.emplace_back(re, im);
    }
    if (values.size() < Grid::min_size)
        format_error("signal needs at least " + std::to_string(Grid::min_size) + " rows");

    const Grid grid(values.size());
    for (std::size_t m = 0; m < t.size(); ++m) {
        if (std::abs(t[m] - grid.node(m)) > 1e-9 * std::max(1.0, std::abs(grid.node(m))))
            format_error("nodes must be uniform on [0,1]; row " + std::to_string(m) + " has t = " + fmt(t[m]));
    }
    return Signal(grid, std::move(values), has_im ? Field::complex : Field::real);
}

Signal read_signal_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) format_error("cannot open " + path);
    return read_signal_csv(in);
}

void write_signal_csv(std::ostream& out, const Signal& F) {
    const bool complex = F.field() == Field::complex;
    out << (complex ? "t,re,im\n" : "t,re\n");
    for (std::size_t m = 0; m < F.size(); ++m) {
        out << fmt(F.grid().node(m)) << ',' << fmt(F[m].real());
        if (complex) out << ',' << fmt(F[m].imag());
        out << '\n';
    }
}

void write_signal_csv(const std::string& path, const Signal& F) {
    std::ofstream out(path);
    if (!out) throw SeparationError(ErrorCode::InputFormat, "cannot write " + path, "output");
    write_signal_csv(out, F);
}

nlohmann::json to_json(const SeparationResult& r) {
    nlohmann::json j;
    j["p1j"] = r.p1;
    j["p2j"] = r.p2;
    if (r.q1 && r.q2)
        j["q_ij"] = {{"q1j", *r.q1}, {"q2j", *r.q2}};
    else
        j["q_ij"] = nullptr;
    j["mu1"] = scalar_json(r.mu1);
    j["mu2"] = scalar_json(r.mu2);
    j["a1"] = scalar_json(r.a1);
    j["a2"] = scalar_json(r.a2);
    const auto& d = r.diagnostics;
    j["residuals"] = {
        {"identify", d.identify.residual_norm},
        {"identify_l0_unit", d.identify.l0_unit_residual},
        {"fit_generator_1", r.fit_residuals[0]},
        {"fit_generator_2", r.fit_residuals[1]},
        {"reconstruction", r.reconstruction_residual},
    };
    j["condition_estimates"] = {
        {"identify", d.identify.condition_estimate},
        {"amplitude_gram", d.amplitude_gram_condition},
    };
    j["identify_rank"] = d.identify.truncated_rank;
    j["gauge"] = std::string(to_string(d.gauge));
    j["degree_b_widened"] = d.widened_b;
    j["valid_node_fraction"] = d.valid_fraction;
    j["clamped_nodes"] = d.clamped_nodes;
    j["k1_segments"] = d.k1_segments;
    j["branch_swapped"] = r.labeling.swapped;
    j["permutation_note"] = r.permutation_note;
    return j;
}

nlohmann::json to_json(const OracleResult& r) {
    return {
        {"best_params", {{"alpha1", r.best_params[0]}, {"beta1", r.best_params[1]},
                         {"alpha2", r.best_params[2]}, {"beta2", r.best_params[3]}}},
        {"best_index", r.best_index},
        {"best_value", r.best_value},
        {"a1", scalar_json(r.a1)},
        {"a2", scalar_json(r.a2)},
        {"evaluated", r.evaluated},
    };
}

void write_report_csv(std::ostream& out, const SweepReport& report) {
    out << "# err = max_j |p_hat_ij - p_ij| / max(1, |p_ij|), best component permutation;"
           " failure = err > 0.5 or stage error; median/p90 over completed trials\n";
    out << "level,median_err,p90_err,fail_rate,trials\n";
    for (const auto& s : report.levels)
        out << fmt(s.level) << ',' << fmt(s.median_err) << ',' << fmt(s.p90_err) << ',' << fmt(s.fail_rate)
            << ',' << s.trials << '\n';
}

} // namespace polysep::io
