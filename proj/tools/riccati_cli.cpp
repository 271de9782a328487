// riccati-solve: command-line front end over TOML problem files.
//
//   riccati-solve solve    <spec> -o <out.csv>
//   riccati-solve validate <spec>
//   riccati-solve sweep    <spec> --constants 0.5,1,2 -o <out.csv>
//
// --grid-n, --tol and --base-point override the file. RICCATI_LOG sets the
// stderr verbosity (error, warn, info, debug).

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "riccati/cli.hpp"

int main(int argc, char** argv) {
    using namespace riccati;
    CLI::App app{"Riccati and second-order linear ODE solver (integrating-factor method)"};
    app.require_subcommand(1);

    std::string spec_path;
    std::string out_path;
    std::string constants_text;
    std::optional<std::size_t> grid_n;
    std::optional<double> tol;
    std::optional<double> base_point;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--grid-n", grid_n, "number of grid nodes (odd)");
        cmd->add_option("--tol", tol, "Picard correction tolerance");
        cmd->add_option("--base-point", base_point, "base point (must be a grid node)");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve a problem and write CSV plus diagnostics");
    solve->add_option("spec", spec_path, "problem file (TOML)")->required();
    solve->add_option("-o,--output", out_path, "output CSV")->required();
    add_overrides(solve);

    CLI::App* validate = app.add_subcommand("validate", "run residual and oracle checks, print a report");
    validate->add_option("spec", spec_path, "problem file (TOML)")->required();
    add_overrides(validate);

    CLI::App* sweep = app.add_subcommand("sweep", "evaluate the solution family for several constants");
    sweep->add_option("spec", spec_path, "problem file (TOML)")->required();
    sweep->add_option("--constants", constants_text, "comma-separated constants, e.g. 0.5,1,2 (inf allowed)");
    sweep->add_option("-o,--output", out_path, "output CSV")->required();
    add_overrides(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::input_error;
    }

    const cli::Log log = cli::Log::from_env();
    const Overrides overrides{grid_n, tol, base_point};

    if (*solve) return cli::cmd_solve(spec_path, out_path, overrides, log);
    if (*validate) return cli::cmd_validate(spec_path, overrides, log, std::cout);
    std::vector<double> constants;
    try {
        constants = cli::parse_constants(constants_text);
    } catch (const SpecError& e) {
        log.error(e.what());
        return cli::input_error;
    }
    return cli::cmd_sweep(spec_path, constants, out_path, overrides, log);
}
