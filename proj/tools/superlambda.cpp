// superlambda: batch CLI for the mean-field and exact engines.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "superlambda/config.hpp"
#include "superlambda/io.hpp"
#include "superlambda/run.hpp"

namespace sl = superlambda;

namespace {

struct Flags
{
    std::string config;
    std::string out;
    std::string svg;
    std::string seed_policy;
    double tol_rel = 0.0;
    double tol_abs = 0.0;
    bool dicke = false;
    bool log_time = false;
    // analyze / compare
    std::string input;
    std::string run_a;
    std::string run_b;
    std::string columns;
    double tolerance = -1.0;
};

void add_common(CLI::App* cmd, Flags& f, bool engine)
{
    cmd->add_option("--config", f.config, "INI configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory");
    if (engine) {
        cmd->add_option("--svg", f.svg, "write SVG plots")
            ->check(CLI::IsMember({"on", "off"}));
        cmd->add_option("--tol-rel", f.tol_rel, "relative tolerance");
        cmd->add_option("--tol-abs", f.tol_abs, "absolute tolerance");
        cmd->add_option("--seed-policy", f.seed_policy,
                        "mean-field correlator seed")
            ->check(CLI::IsMember({"none", "fluctuation"}));
        cmd->add_flag("--dicke", f.dicke, "Dicke-limit couplings (exact)");
        cmd->add_flag("--log-time", f.log_time, "log-scaled time axis in plots");
    }
}

sl::Overrides overrides_from(const Flags& f, const std::string& mode,
                             const CLI::App* cmd)
{
    sl::Overrides o;
    o["mode"] = mode;
    if (!f.out.empty()) {
        o["output.dir"] = f.out;
    }
    if (!f.svg.empty()) {
        o["output.svg"] = f.svg;
    }
    auto given = [cmd](const char* name) {
        const auto* opt = cmd->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--tol-rel")) {
        o["solver.rel"] = sl::format_g17(f.tol_rel);
    }
    if (given("--tol-abs")) {
        o["solver.abs"] = sl::format_g17(f.tol_abs);
    }
    if (!f.seed_policy.empty()) {
        o["solver.seed"] = f.seed_policy;
    }
    if (f.dicke) {
        o["geometry.coupling"] = "dicke";
    }
    if (f.log_time) {
        o["output.log_time"] = "true";
    }
    if (!f.input.empty()) {
        o["analyze.input"] = f.input;
    }
    if (!f.run_a.empty()) {
        o["compare.run_a"] = f.run_a;
    }
    if (!f.run_b.empty()) {
        o["compare.run_b"] = f.run_b;
    }
    if (!f.columns.empty()) {
        o["compare.columns"] = f.columns;
    }
    if (f.tolerance >= 0.0) {
        o["compare.tolerance"] = sl::format_g17(f.tolerance);
    }
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Collective emission of driven Lambda ensembles: mean-field "
                 "and exact master-equation engines"};
    app.require_subcommand(1);
    app.footer("Environment overrides: SUPERLAMBDA_<SECTION>_<KEY>, e.g. "
               "SUPERLAMBDA_SOLVER_REL=1e-10. Command-line flags take "
               "precedence over the environment, which takes precedence over "
               "the config file.\nExit codes: 0 ok, 2 config, 3 capacity, "
               "4 integration, 5 comparison failed.");

    Flags flags;
    std::vector<std::pair<CLI::App*, std::string>> modes;
    const std::pair<const char*, const char*> commands[] = {
        {"meanfield", "closed mean-field equations, N >= 10"},
        {"exact", "full master equation, N <= 4"},
        {"single-atom", "exact N = 1 run with the closed-form reference"},
        {"sweep", "mean-field runs over a list of omega_bar values"},
        {"analyze", "pulse metrics of an existing trajectory"},
        {"compare", "column deviations between two runs"}};
    for (const auto& [name, help] : commands) {
        const std::string mode = name;
        auto* cmd = app.add_subcommand(mode, help);
        const bool engine = mode != "analyze" && mode != "compare";
        add_common(cmd, flags, engine);
        if (mode == "analyze") {
            cmd->add_option("--input", flags.input,
                            "trajectory CSV or run directory");
        }
        if (mode == "compare") {
            cmd->add_option("--run-a", flags.run_a, "first run");
            cmd->add_option("--run-b", flags.run_b, "second run");
            cmd->add_option("--columns", flags.columns,
                            "comma-separated column names");
            cmd->add_option("--tolerance", flags.tolerance,
                            "max absolute deviation");
        }
        modes.emplace_back(cmd, mode);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : sl::exit_code(sl::ErrorKind::config);
    }

    try {
        for (const auto& [cmd, mode] : modes) {
            if (!cmd->parsed()) {
                continue;
            }
            const std::string text =
                flags.config.empty() ? "" : sl::read_text_file(flags.config);
            const sl::RunConfig config =
                sl::parse_config(text, sl::process_environment(),
                                 overrides_from(flags, mode, cmd));
            const sl::RunResult result = sl::run(config);
            std::cout << result.report;
            return result.exit_code;
        }
    } catch (const sl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (const auto* ie = dynamic_cast<const sl::IntegrationError*>(&e)) {
            std::cerr << "last good time: " << ie->last_time() << "\n";
        }
        return sl::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
