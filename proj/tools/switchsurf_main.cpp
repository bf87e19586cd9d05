// Command line front end. Subcommands mirror the pipeline stages:
//
//   switchsurf equilibrium --config run.cfg [--out dir]
//   switchsurf synth       --config run.cfg [--out dir]
//   switchsurf simulate    --config run.cfg [--out dir]
//   switchsurf verify      --config run.cfg [--out dir] [--seed N]
//
// Every run writes <out>/summary.json; simulate additionally writes the
// trajectory table and, in the plane, an SVG phase portrait.

#include <cstdint>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "switchsurf/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"switching-surface design and verification for two-mode switched systems"};
    app.require_subcommand(1);

    switchsurf::cli::CommandArgs args;
    std::uint64_t seed_value = 0;
    std::vector<std::pair<CLI::App*, CLI::Option*>> seed_opts;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "run configuration file")
            ->required();
        sub->add_option("--out", args.out_dir, "output directory for artifacts (default: .)");
        seed_opts.emplace_back(
            sub, sub->add_option("--seed", seed_value, "override the sampling seed"));
    };

    CLI::App* c_eq =
        app.add_subcommand("equilibrium", "locate switched equilibria for the configured system");
    add_common(c_eq);
    CLI::App* c_synth =
        app.add_subcommand("synth", "establish a common quadratic Lyapunov certificate");
    add_common(c_synth);
    CLI::App* c_sim =
        app.add_subcommand("simulate", "integrate the closed loop under the configured rule");
    add_common(c_sim);
    CLI::App* c_verify =
        app.add_subcommand("verify", "sample-check the region geometry behind the design");
    add_common(c_verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : switchsurf::cli::kExitUsage;
    }

    for (const auto& [sub, opt] : seed_opts)
        if (sub->parsed() && opt->count() > 0) args.seed = seed_value;

    if (app.got_subcommand(c_eq)) return switchsurf::cli::cmd_equilibrium(args);
    if (app.got_subcommand(c_synth)) return switchsurf::cli::cmd_synth(args);
    if (app.got_subcommand(c_sim)) return switchsurf::cli::cmd_simulate(args);
    if (app.got_subcommand(c_verify)) return switchsurf::cli::cmd_verify(args);
    return switchsurf::cli::kExitUsage;
}
