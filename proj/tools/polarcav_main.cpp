// polarcav: emission spectra and decay rates of a polar two-level system in
// a lossy single-mode cavity.
//
// exit codes: 0 ok, 1 config error, 2 numerical failure, 3 validity breach (--strict)

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "polarcav/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

enum Exit { ok = 0, config_error = 1, numerical_failure = 2, validity_breach = 3 };

void emit(const polarcav::cli::Report& report, polarcav::cli::OutputFormat format, const std::string& out_path)
{
    using polarcav::cli::OutputFormat;
    if (out_path.empty() || out_path == "-") {
        if (format == OutputFormat::json)
            polarcav::cli::write_json(std::cout, report);
        else
            polarcav::cli::write_table(std::cout, report);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw polarcav::cli::ConfigError("cannot write '" + out_path + "'");
    if (format == OutputFormat::json) {
        polarcav::cli::write_json(out, report);
    } else {
        polarcav::cli::write_table(out, report);
        std::ofstream meta(out_path + ".meta.json", std::ios::binary);
        meta << polarcav::cli::metadata_json(report).dump(1) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Emission spectra and decay rates of a polar two-level system in a lossy cavity"};
    std::string command;
    std::string preset_name;
    std::string config_path;
    std::string out_path;
    std::string format = "table";
    bool strict = false;
    int threads = -1;
    bool list_presets = false;
    bool dump_config = false;

    app.add_option("command", command, "spectrum | rates | sweep | crossings | validate")
        ->check(CLI::IsMember({"spectrum", "rates", "sweep", "crossings", "validate"}));
    app.add_option("--preset", preset_name, "figure preset");
    app.add_option("--config", config_path, "JSON config applied on top of the preset");
    app.add_option("--out", out_path, "output file (default stdout)");
    app.add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));
    app.add_flag("--strict", strict, "exit 3 when a result leaves the perturbative validity range");
    app.add_option("--threads", threads, "sweep workers, 0 = all cores");
    app.add_flag("--list-presets", list_presets, "print preset names and exit");
    app.add_flag("--dump-config", dump_config, "print the resolved configuration as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::config_error;
    }

    if (list_presets) {
        for (const auto& n : polarcav::cli::preset_names())
            std::cout << n << '\n';
        return Exit::ok;
    }

    polarcav::cli::RunConfig cfg;
    try {
        if (!preset_name.empty())
            cfg = polarcav::cli::preset(preset_name);
        if (!config_path.empty())
            cfg = polarcav::cli::load_config_file(config_path, cfg);
        if (strict)
            cfg.strict = true;
        if (threads >= 0)
            cfg.threads = threads;
        cfg.check();
        if (dump_config) {
            std::cout << polarcav::cli::to_json(cfg).dump(1) << '\n';
            return Exit::ok;
        }
        if (command.empty())
            throw polarcav::cli::ConfigError("no command given (spectrum, rates, sweep, crossings, validate)");
    } catch (const polarcav::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_error;
    }

    try {
        const auto report = polarcav::cli::run(polarcav::cli::parse_command(command), cfg);
        emit(report, format == "json" ? polarcav::cli::OutputFormat::json : polarcav::cli::OutputFormat::table,
             out_path);
        for (const auto& w : report.warnings)
            std::cerr << "warning: " << w << '\n';
        if (cfg.strict && report.validity_breach) {
            std::cerr << "validity breach in strict mode\n";
            return Exit::validity_breach;
        }
    } catch (const polarcav::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_error;
    } catch (const polarcav::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return Exit::numerical_failure;
    }
    return Exit::ok;
}
