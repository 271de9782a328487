#pragma once

// solve / validate / sweep over a problem file. Exit status: 0 success,
// 1 bad input (file, TOML, expressions, settings) or failed validation checks,
// 2 numerical failure. Output files are written only when a command succeeds.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "riccati/csv.hpp"
#include "riccati/linear2.hpp"
#include "riccati/problem_spec.hpp"
#include "riccati/solver.hpp"
#include "riccati/validation.hpp"

namespace riccati::cli {

enum ExitCode : int { ok = 0, input_error = 1, numerical_error = 2 };

// Tolerances applied by `validate`.
inline constexpr double residual_tol = 1e-4;
inline constexpr double first_integral_tol = 1e-5;
inline constexpr double oracle_tol = 1e-6;
inline constexpr double substitution_tol = 1e-8;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Messages go to stderr, filtered by RICCATI_LOG (error|warn|info|debug, default warn).
class Log {
public:
    explicit Log(LogLevel level = LogLevel::warn, std::ostream& os = std::cerr) : level_(level), os_(&os) {}

    static Log from_env(std::ostream& os = std::cerr) {
        const char* v = std::getenv("RICCATI_LOG");
        LogLevel level = LogLevel::warn;
        if (v) {
            const std::string s(v);
            if (s == "error") level = LogLevel::error;
            else if (s == "warn") level = LogLevel::warn;
            else if (s == "info") level = LogLevel::info;
            else if (s == "debug") level = LogLevel::debug;
        }
        return Log(level, os);
    }

    void error(const std::string& m) const { write(LogLevel::error, "error", m); }
    void warn(const std::string& m) const { write(LogLevel::warn, "warn", m); }
    void info(const std::string& m) const { write(LogLevel::info, "info", m); }
    void debug(const std::string& m) const { write(LogLevel::debug, "debug", m); }

private:
    void write(LogLevel at, const char* tag, const std::string& m) const {
        if (at <= level_) *os_ << "riccati-solve: " << tag << ": " << m << '\n';
    }

    LogLevel level_;
    std::ostream* os_;
};

namespace detail {

using json = nlohmann::ordered_json;

inline json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json numbers(const std::vector<double>& v) {
    json a = json::array();
    for (double e : v) a.push_back(number(e));
    return a;
}

inline std::string jsonl(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) out += r.dump() + "\n";
    return out;
}

inline std::string diagnostics_path(const std::string& out) { return out + ".diagnostics.jsonl"; }

/// Writes every file to a temporary sibling first and renames only when all
/// writes succeeded, so a failure leaves no output behind.
inline void commit(const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    std::vector<std::string> temps;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [path, content] : files) {
        const std::string tmp = path + ".tmp";
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) temps.push_back(tmp);
        out << content;
        out.close();
        if (!out) {
            cleanup();
            throw SpecError("cannot write " + path);
        }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::error_code ec;
        fs::rename(temps[i], files[i].first, ec);
        if (ec) {
            cleanup();
            for (std::size_t j = 0; j < i; ++j) fs::remove(files[j].first, ec);
            throw SpecError("cannot write " + files[i].first);
        }
    }
}

inline json problem_record(const ProblemSpec& spec, const Grid& g, std::size_t base) {
    json r;
    r["record"] = "problem";
    r["kind"] = spec.kind == ProblemKind::riccati ? "riccati" : "linear2";
    json coeffs;
    for (const auto& [k, v] : spec.coefficients) coeffs[k] = v;
    r["coefficients"] = coeffs;
    json params = json::object();
    for (const auto& [k, v] : spec.params) params[k] = v;
    r["params"] = params;
    r["x_lo"] = g.x_lo();
    r["x_hi"] = g.x_hi();
    r["n"] = g.size();
    r["base_point"] = g.x(base);
    return r;
}

inline json factors_record(const IntegratingFactors& f) {
    json r;
    r["record"] = "factors";
    r["iterations"] = f.iterations;
    r["terminal_correction"] = number(f.terminal_correction);
    r["corrections"] = numbers(f.corrections);
    return r;
}

inline json residual_record(double c, const ResidualReport& rep) {
    json r;
    r["record"] = "residual";
    r["C"] = number(c);
    r["identity"] = number(rep.identity);
    r["finite_difference"] = number(rep.finite_difference);
    r["nodes_checked"] = rep.nodes_checked;
    r["nodes_excluded"] = rep.nodes_excluded;
    return r;
}

inline json poles_record(double c, const std::vector<double>& poles, std::size_t masked) {
    json r;
    r["record"] = "poles";
    r["C"] = number(c);
    r["poles"] = numbers(poles);
    r["masked_nodes"] = masked;
    return r;
}

inline std::size_t count_masked(const std::vector<bool>& mask) {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

inline ProblemSpec load(const std::string& spec_path, const Overrides& o, const Log& log) {
    ProblemSpec spec = load_spec(spec_path);
    apply(spec, o);
    log.debug("loaded " + spec_path);
    return spec;
}

inline void log_factors(const Log& log, const IntegratingFactors& f) {
    log.info("alpha converged in " + std::to_string(f.iterations) + " iterations, last correction " +
             format_number(f.terminal_correction));
}

/// Runs `body` and maps exceptions onto exit codes.
template <class Body>
int guarded(const Log& log, Body&& body) {
    try {
        return body();
    } catch (const SpecError& e) {
        log.error(e.what());
        return input_error;
    } catch (const ParseError& e) {
        log.error(e.what());
        return input_error;
    } catch (const NumericalError& e) {
        log.error(e.what());
        return numerical_error;
    } catch (const EvalError& e) {
        log.error(std::string("evaluation: ") + e.what());
        return numerical_error;
    }
}

// ---------------------------------------------------------------------------
// validate report

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool pass() const { return value <= tolerance; }
};

inline void print_report(std::ostream& os, const std::vector<Check>& checks) {
    os << std::left << std::setw(34) << "check" << std::right << std::setw(14) << "value" << std::setw(12)
       << "tolerance" << "  status\n";
    for (const auto& c : checks) {
        std::ostringstream v, t;
        v << std::scientific << std::setprecision(3) << c.value;
        t << std::scientific << std::setprecision(1) << c.tolerance;
        os << std::left << std::setw(34) << c.name << std::right << std::setw(14) << v.str() << std::setw(12)
           << t.str() << "  " << (c.pass() ? "ok" : "FAIL") << '\n';
    }
}

inline std::string c_label(double c) { return std::isinf(c) ? "C=inf" : "C=" + format_number(c); }

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_solve(const std::string& spec_path, const std::string& out_path, const Overrides& o, const Log& log) {
    return detail::guarded(log, [&] {
        ProblemSpec spec = detail::load(spec_path, o, log);
        std::ostringstream csv;
        std::vector<detail::json> diag;
        if (spec.kind == ProblemKind::riccati) {
            RiccatiProblem prob = riccati_problem(spec);
            RiccatiSolution sol = solve_riccati(prob, spec.solver);
            detail::log_factors(log, sol.factors());
            const double c = spec.C.value_or(particular_constant);
            write_riccati_csv(csv, sol, c);
            diag.push_back(detail::problem_record(spec, sol.grid(), sol.factors().base_index));
            diag.back()["C"] = detail::number(c);
            diag.back()["restricted"] = sol.restricted();
            diag.push_back(detail::factors_record(sol.factors()));
            diag.push_back(detail::residual_record(particular_constant, riccati_residual(sol, particular_constant)));
            if (!std::isinf(c)) diag.push_back(detail::residual_record(c, riccati_residual(sol, c)));
            const auto poles = detect_poles(sol, c);
            diag.push_back(detail::poles_record(c, poles, detail::count_masked(pole_mask(sol.grid(), poles))));
        } else {
            LinearProblem prob = linear_problem(spec);
            LinearSolution sol = solve_linear(prob, spec.solver);
            detail::log_factors(log, sol.factors());
            write_linear_csv(csv, sol, spec.C1, spec.C2);
            diag.push_back(detail::problem_record(spec, sol.grid(), sol.factors().base_index));
            diag.back()["C1"] = spec.C1;
            diag.back()["C2"] = spec.C2;
            diag.back()["restricted"] = sol.restricted();
            diag.push_back(detail::factors_record(sol.factors()));
            detail::json r;
            r["record"] = "residual";
            r["first_integral"] = detail::number(first_integral_check(sol, spec.C1, spec.C2));
            r["ode"] = detail::number(linear_residual(sol, sol.y(spec.C1, spec.C2)));
            diag.push_back(r);
        }
        detail::commit({{out_path, csv.str()}, {detail::diagnostics_path(out_path), detail::jsonl(diag)}});
        log.info("wrote " + out_path);
        return static_cast<int>(ok);
    });
}

inline int cmd_validate(const std::string& spec_path, const Overrides& o, const Log& log, std::ostream& out) {
    return detail::guarded(log, [&] {
        ProblemSpec spec = detail::load(spec_path, o, log);
        std::vector<detail::Check> checks;
        const auto reference = reference_expr(spec);
        const Params ref_params = reference_params(spec);
        if (spec.kind == ProblemKind::riccati) {
            RiccatiProblem prob = riccati_problem(spec);
            RiccatiSolution sol = solve_riccati(prob, spec.solver);
            detail::log_factors(log, sol.factors());
            std::vector<double> constants{particular_constant};
            if (spec.C && !std::isinf(*spec.C)) constants.push_back(*spec.C);
            for (double c : constants) {
                const std::string tag = " [" + detail::c_label(c) + "]";
                const ResidualReport rep = riccati_residual(sol, c);
                checks.push_back({"residual identity" + tag, rep.identity, cli::residual_tol});
                checks.push_back({"residual differenced" + tag, rep.finite_difference, cli::residual_tol});
                checks.push_back({"rk oracle" + tag, rk_deviation(sol, c).value, cli::oracle_tol});
            }
            if (reference) {
                checks.push_back(
                    {"reference substitution", substitution_residual(prob, *reference, ref_params).value,
                     cli::substitution_tol});
                const auto [c, dev] = family_agreement(sol, *reference, ref_params);
                log.info("reference matched to C=" + format_number(c));
                checks.push_back({"reference family agreement", dev.value, cli::oracle_tol});
            }
        } else {
            LinearProblem prob = linear_problem(spec);
            LinearSolution sol = solve_linear(prob, spec.solver);
            detail::log_factors(log, sol.factors());
            checks.push_back({"first integral", first_integral_check(sol, spec.C1, spec.C2), cli::first_integral_tol});
            checks.push_back({"residual differenced", linear_residual(sol, sol.y(spec.C1, spec.C2)), cli::residual_tol});
            checks.push_back({"rk oracle", rk_deviation(sol, prob, spec.C1, spec.C2).value, cli::oracle_tol});
            if (reference) {
                checks.push_back(
                    {"reference substitution", substitution_residual(prob, *reference, ref_params).value,
                     cli::substitution_tol});
                checks.push_back(
                    {"reference family agreement", family_agreement(sol, *reference, ref_params).second.value,
                     cli::oracle_tol});
            }
        }
        detail::print_report(out, checks);
        const bool all = std::all_of(checks.begin(), checks.end(), [](const detail::Check& c) { return c.pass(); });
        if (!all) log.error("validation failed");
        return static_cast<int>(all ? ok : input_error);
    });
}

inline int cmd_sweep(const std::string& spec_path, const std::vector<double>& constants, const std::string& out_path,
                     const Overrides& o, const Log& log) {
    return detail::guarded(log, [&] {
        ProblemSpec spec = detail::load(spec_path, o, log);
        if (spec.kind != ProblemKind::riccati) throw SpecError("sweep needs kind = \"riccati\"");
        RiccatiProblem prob = riccati_problem(spec);
        RiccatiSolution sol = solve_riccati(prob, spec.solver);
        detail::log_factors(log, sol.factors());
        const Grid& g = sol.grid();

        std::vector<std::string> names{"y_p"};
        std::vector<GridFunction> columns{sol.y_p()};
        std::vector<detail::json> diag{detail::problem_record(spec, g, sol.factors().base_index),
                                       detail::factors_record(sol.factors())};
        for (double c : constants) {
            const auto poles = detect_poles(sol, c);
            const auto mask = pole_mask(g, poles);
            GridFunction y = sol.y(c);
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (mask[k]) y[k] = std::numeric_limits<double>::quiet_NaN();
            }
            names.push_back(detail::c_label(c));
            columns.push_back(std::move(y));
            diag.push_back(detail::poles_record(c, poles, detail::count_masked(mask)));
            diag.push_back(detail::residual_record(c, riccati_residual(sol, c)));
            if (!poles.empty()) log.info(detail::c_label(c) + ": " + std::to_string(poles.size()) + " pole(s)");
        }
        std::vector<const GridFunction*> ptrs;
        for (const auto& col : columns) ptrs.push_back(&col);
        std::ostringstream csv;
        write_csv(csv, g, names, ptrs);
        detail::commit({{out_path, csv.str()}, {detail::diagnostics_path(out_path), detail::jsonl(diag)}});
        log.info("wrote " + out_path);
        return static_cast<int>(ok);
    });
}

/// "0.5,1,2" -> {0.5, 1, 2}; "" -> {}. Accepts inf.
inline std::vector<double> parse_constants(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw SpecError("empty entry in --constants");
        item = item.substr(b, e - b + 1);
        if (item == "inf" || item == "+inf") {
            out.push_back(particular_constant);
            continue;
        }
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size() || !std::isfinite(v))
            throw SpecError("bad constant '" + item + "' in --constants");
        out.push_back(v);
    }
    return out;
}

}  // namespace riccati::cli
