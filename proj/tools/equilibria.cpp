#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "equilibria/cli.hpp"

namespace {

using namespace equilibria;
using equilibria::cli::json;

int fail(int code, const std::string& msg)
{
    std::cerr << "equilibria: " << msg << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Equilibrium points of generalized point-charge potentials"};
    app.footer(
        "Modes: solve, sweep, voronoi, bounds, three, grid, report.\n"
        "Config: JSON object with sites, charges, alpha | alphas (list or {from,to,step}),\n"
        "  subspace {base, directions}, seed, limits {seeds=0 (64 per charge), tolerance=1e-10,\n"
        "  max_iterations=200, retries=2, gamma_resolution=2048}, exact=false, l (bounds),\n"
        "  three {zeta1, zeta2, a, b, alpha} (numbers or \"p/q\"), window {x:[lo,hi], y:[lo,hi]},\n"
        "  resolution (grid, default 256).  alpha defaults to 1 in solve and grid modes.\n"
        "Exit codes: 0 ok, 2 validation error, 3 numerical failure present in records.\n"
        "report reads the JSONL records given by --config and prints a table.");
    std::string mode_name, config_path, out_path = "-";
    unsigned jobs = default_jobs();
    std::optional<std::uint64_t> seed;
    bool exact = false;
    app.add_option("mode", mode_name, "solve | sweep | voronoi | bounds | three | grid | report")->required();
    app.add_option("--config", config_path, "JSON config (records file for report)")->required();
    app.add_option("--out", out_path, "output file: JSONL records, CSV for grid, table for report ('-' = stdout)")
        ->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "RNG seed, overrides the config");
    app.add_flag("--exact", exact, "also run exact Sturm counts on line restrictions (integer alpha)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : cli::exit_validation;
    }

    std::ofstream file;
    auto open_out = [&]() -> std::ostream& {
        if (out_path == "-")
            return std::cout;
        file.open(out_path);
        if (!file)
            throw Error(Errc::validation, "cannot open output file " + out_path);
        return file;
    };

    try {
        if (mode_name == "report") {
            std::ifstream in(config_path);
            if (!in)
                return fail(cli::exit_validation, "cannot read " + config_path);
            cli::report(in, open_out());
            return cli::exit_ok;
        }
        auto mode = cli::parse_mode(mode_name);
        if (!mode)
            return fail(cli::exit_validation, "unknown mode '" + mode_name + "'");
        std::ifstream in(config_path);
        if (!in)
            return fail(cli::exit_validation, "cannot read " + config_path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            return fail(cli::exit_validation, std::string("config is not valid JSON: ") + e.what());
        }
        cli::RunConfig cfg = cli::parse_config(j, mode);
        if (seed)
            cfg.seed = *seed;
        cfg.exact = cfg.exact || exact;

        if (cfg.mode == cli::Mode::grid) {
            cli::emit_grid(cfg, open_out());
            return cli::exit_ok;
        }
        auto records = cli::run_units(cfg, jobs);
        std::ostream& os = open_out();
        bool numerical = false;
        for (const auto& r : records) {
            os << r.dump() << "\n";
            const auto status = r["status"].get<std::string>();
            if (status == "numerical_failure") {
                numerical = true;
                std::cerr << "equilibria: numerical failure in record " << r["run_id"].get<std::string>() << "\n";
            } else if (status == "counterexample") {
                std::cerr << "equilibria: flagged counterexample in record " << r["run_id"].get<std::string>()
                          << ", review manually\n";
            }
        }
        return numerical ? cli::exit_numerical : cli::exit_ok;
    } catch (const Error& e) {
        switch (e.code()) {
        case Errc::unresolved:
        case Errc::non_regular_value:
        case Errc::degenerate_census:
        case Errc::identity_violation:
        case Errc::reduction_failure:
            return fail(cli::exit_numerical, e.what());
        default:
            return fail(cli::exit_validation, e.what());
        }
    } catch (const std::exception& e) {
        return fail(cli::exit_numerical, std::string("internal error: ") + e.what());
    }
}
