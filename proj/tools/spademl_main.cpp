#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "spademl/errors.hpp"
#include "spademl/experiment.hpp"

namespace {

// exit codes: 0 ok, 1 config error, 2 data error, 3 numerical guard
int guarded(int (*fn)(const std::string&), const std::string& config_path) {
    try {
        return fn(config_path);
    } catch (const spademl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const spademl::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const spademl::NumericalGuardError& e) {
        std::fprintf(stderr, "numerical guard: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int do_run(const std::string& config_path) {
    const auto config = spademl::load_config(config_path);
    const auto report = spademl::run_experiment(config);
    std::printf("wrote %s (%zu cells, %.1f s)\n", config.output_dir.c_str(),
                report.cells.size(), report.wall_seconds);
    for (const auto& cell : report.cells)
        std::printf("  sigma_eff=%-8.4g N=%-7llu accuracy %.4f +/- %.4f\n",
                    cell.sigma_eff,
                    static_cast<unsigned long long>(cell.photon_count),
                    cell.report.accuracy_mean, cell.report.accuracy_std);
    return 0;
}

int do_scatter(const std::string& config_path) {
    const auto config = spademl::load_config(config_path);
    spademl::emit_scatter(config);
    std::printf("wrote %s/scatter.csv\n", config.output_dir.c_str());
    return 0;
}

int do_validate(const std::string& config_path) {
    const auto config = spademl::load_config(config_path);
    spademl::validate_config(config);
    std::printf("config ok: %s, %s model, %zu x %zu cells\n",
                spademl::measurement_name(config.measurement),
                spademl::model_kind_name(config.model), config.scale_factors.size(),
                config.photon_counts.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon-counting imaging simulation and classification"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment described by a config");
    run->add_option("config", config_path, "JSON config file")->required();
    auto* scatter =
        app.add_subcommand("scatter", "emit exact per-image moment scatter CSV");
    scatter->add_option("config", config_path, "JSON config file")->required();
    auto* validate =
        app.add_subcommand("validate", "dry-run schema and feasibility check");
    validate->add_option("config", config_path, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (run->parsed()) return guarded(do_run, config_path);
    if (scatter->parsed()) return guarded(do_scatter, config_path);
    return guarded(do_validate, config_path);
}
