// Command-line driver: run, validate, dump-defaults.

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "vlsim/config.hpp"
#include "vlsim/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int runJobs(const vlsim::ScenarioConfig& base, const std::filesystem::path& out, int jobs)
{
    if (jobs <= 1) {
        const auto report = vlsim::runScenario(base);
        vlsim::writeOutputs(report, out);
        std::cout << "wrote " << report.vehicles.size() << " vehicle rows to " << out.string() << "\n";
        return 0;
    }

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    {
        std::vector<std::jthread> workers;
        for (int j = 0; j < jobs; ++j) {
            workers.emplace_back([&, j] {
                try {
                    auto cfg = base;
                    cfg.seed = base.seed + static_cast<std::uint64_t>(j);
                    const auto report = vlsim::runScenario(cfg);
                    vlsim::writeOutputs(report, out / ("seed_" + std::to_string(cfg.seed)));
                }
                catch (...) {
                    errors[static_cast<std::size_t>(j)] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }
    std::cout << "wrote " << jobs << " seed directories to " << out.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Vehicular cellular system-level simulator"};
    app.require_subcommand(1);

    std::string configPath;
    std::string outDir;
    std::optional<std::uint64_t> seed;
    std::optional<double> until;
    int jobs = 1;

    auto* run = app.add_subcommand("run", "Run a scenario and write metrics");
    run->add_option("--config", configPath, "Scenario configuration file")->required();
    run->add_option("--out", outDir, "Output directory")->required();
    run->add_option("--seed", seed, "Override the configured seed");
    run->add_option("--until", until, "Override the simulated duration (seconds)")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "Run K consecutive seeds in parallel")->check(CLI::Range(1, 1024));

    auto* validate = app.add_subcommand("validate", "Check a configuration and its trace");
    validate->add_option("--config", configPath, "Scenario configuration file")->required();

    auto* dump = app.add_subcommand("dump-defaults", "Print the default configuration");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (dump->parsed()) {
        std::cout << vlsim::dumpConfig(vlsim::defaultConfig());
        return 0;
    }

    vlsim::ScenarioConfig cfg;
    try {
        cfg = vlsim::loadConfig(configPath);
        if (seed)
            cfg.seed = *seed;
        if (until)
            cfg.simEnd = vlsim::SimTime::fromSeconds(*until);
        if (validate->parsed()) {
            const auto trajectories = vlsim::loadTrace(cfg.traceFile);
            vlsim::Scenario check(cfg, trajectories);
            std::cout << "ok: " << cfg.enbs.size() << " eNBs, " << trajectories.size() << " vehicles, "
                      << cfg.flows.size() << " flows\n";
            return 0;
        }
    }
    catch (const vlsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const vlsim::TraceParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }

    try {
        return runJobs(cfg, outDir, jobs);
    }
    catch (const vlsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const vlsim::TraceParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
