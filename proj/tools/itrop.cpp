#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "itrop/itrop.h"

namespace {

int exit_code(itrop_status status)
{
    switch (status) {
    case ITROP_OK:
        return 0;
    case ITROP_DIVERGENCE:
        return 2;
    case ITROP_ASSUMPTION_VIOLATED:
        return 3;
    default:
        return 1;
    }
}

int report(itrop_status status)
{
    if (status != ITROP_OK && status != ITROP_ASSUMPTION_VIOLATED && *itrop_last_error())
        std::fprintf(stderr, "itrop: %s\n", itrop_last_error());
    else if (status == ITROP_ASSUMPTION_VIOLATED)
        std::fprintf(stderr, "itrop: at least one assumption check returned 'violated'\n");
    return exit_code(status);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Iterated random operator experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(itrop_version()));

    std::string config_path;
    unsigned jobs = 0;
    std::string output_dir;
    std::optional<std::uint64_t> seed;

    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
        cmd->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
        cmd->add_option("--output-dir", output_dir, "Output directory");
        cmd->add_option("--seed", seed, "Master seed");
    };
    auto* run = app.add_subcommand("run", "Run the paired-trajectory experiment named by the config");
    add_overrides(run);
    auto* check = app.add_subcommand("check", "Run the assumption checks for the config's operator family");
    add_overrides(check);

    auto* gen = app.add_subcommand("gen", "Generate a seeded asset");
    gen->require_subcommand(1);
    std::string out_path;
    std::uint64_t gen_seed = 0;

    auto* gen_mdp = gen->add_subcommand("mdp", "Random MDP model (JSON)");
    std::size_t num_states = 20;
    std::size_t num_actions = 5;
    double discount = 0.9;
    gen_mdp->add_option("--states", num_states, "Number of states")->capture_default_str();
    gen_mdp->add_option("--actions", num_actions, "Number of actions")->capture_default_str();
    gen_mdp->add_option("--discount", discount, "Discount factor in (0,1)")->capture_default_str();
    gen_mdp->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen_mdp->add_option("-o,--out", out_path, "Output path")->required();

    auto* gen_data = gen->add_subcommand("dataset", "Synthetic regression dataset (CSV)");
    std::string family = "logistic";
    std::size_t num_samples = 1000;
    std::size_t dim = 20;
    gen_data->add_option("--family", family, "logistic or poisson")
        ->check(CLI::IsMember({"logistic", "poisson"}))
        ->capture_default_str();
    gen_data->add_option("--samples", num_samples, "Number of samples")->capture_default_str();
    gen_data->add_option("--dim", dim, "Feature dimension including the intercept")->capture_default_str();
    gen_data->add_option("--seed", gen_seed, "Seed")->capture_default_str();
    gen_data->add_option("-o,--out", out_path, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    itrop_overrides overrides{};
    overrides.jobs = jobs;
    overrides.output_dir = output_dir.empty() ? nullptr : output_dir.c_str();
    overrides.has_seed = seed.has_value() ? 1 : 0;
    overrides.seed = seed.value_or(0);

    if (run->parsed())
        return report(itrop_run_experiment(config_path.c_str(), &overrides));
    if (check->parsed())
        return report(itrop_run_checks(config_path.c_str(), &overrides));
    if (gen_mdp->parsed())
        return report(itrop_gen_mdp(num_states, num_actions, discount, gen_seed, out_path.c_str()));
    return report(itrop_gen_dataset(family.c_str(), num_samples, dim, gen_seed, out_path.c_str()));
}
