// mtqm: run scenario files through the solvers.
//
//   mtqm run scenarios/bounce.ini --out out/bounce
//   mtqm verify scenarios/verify.ini
//   mtqm converge scenarios/convergence.ini --threads 4
//   mtqm inspect scenarios/bounce.ini
//
// Exit status: 0 on success (all checks PASS), 1 on a failed check or numerical error, 2 on bad input.

#include <iostream>

#include <CLI11.hpp>

#include "mtqm/parallel.hpp"
#include "mtqm/runner.hpp"

namespace {

constexpr int exit_fail = 1;
constexpr int exit_input = 2;

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-time photon-electron contact model: scenario runner"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    unsigned seed = mtqm::RunOptions{}.seed;
    std::string out_dir;
    app.add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "Seed for the randomized checks in verify");
    app.add_option("--out", out_dir, "Output directory (overrides outputs.directory)");

    std::string path;
    auto* run = app.add_subcommand("run", "Run the scenario in its configured mode");
    auto* verify = app.add_subcommand("verify", "Run the verification suite on the scenario");
    auto* converge = app.add_subcommand("converge", "Run the epsilon ladder of the scenario");
    auto* inspect = app.add_subcommand("inspect", "Print the scenario after default resolution");
    for (auto* sub : {run, verify, converge, inspect})
        sub->add_option("scenario", path, "Scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_input;
    }

    mtqm::Scenario scenario;
    try {
        scenario = mtqm::load_scenario(path);
        if (*verify)
            scenario.mode = mtqm::Mode::Verify;
        if (*converge)
            scenario.mode = mtqm::Mode::Convergence;
        if (const auto problems = mtqm::validate(scenario); !problems.empty())
            throw mtqm::ScenarioError(problems);
    } catch (const mtqm::ScenarioError& e) {
        std::cerr << e.what() << "\n";
        return exit_input;
    }

    if (*inspect) {
        std::cout << "# hash " << mtqm::scenario_hash(scenario) << "\n";
        mtqm::save_scenario(scenario, std::cout);
        return 0;
    }

    mtqm::set_thread_count(threads);
    mtqm::RunOptions options;
    options.out_dir = out_dir;
    options.seed = seed;
    const auto record = mtqm::run_scenario(scenario, options, std::cout);
    std::cout << (record.complete ? "complete" : "incomplete") << " in " << record.seconds << " s\n";
    if (!record.complete || !record.all_pass())
        return exit_fail;
    return 0;
}
