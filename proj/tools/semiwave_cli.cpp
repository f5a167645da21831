// semiwave command line: configuration-driven runs of the root solvers,
// the delay-ODE certifier, model constant tables, linear decay experiments,
// profile relaxation, stability experiments, and parameter sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "semiwave/runner.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    long seed = 0;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* opt = cmd->add_option("--config", args.config, "run configuration file");
    if (config_required) opt->required();
    cmd->add_option("--out", args.out, "output directory (default: out)");
    cmd->add_option("--seed", args.seed, "seed for randomized presets");
    cmd->add_option("--workers", args.workers, "sweep worker count (0 = hardware)");
}

int execute(const std::string& sub, const CommonArgs& args) {
    using namespace semiwave::cli;
    RunContext ctx;
    ctx.out_dir = args.out;
    ctx.seed = static_cast<unsigned long>(args.seed);
    ctx.workers = args.workers;
    try {
        RunConfig cfg = RunConfig::parse_file(args.config);
        if (cfg.has("run", "subcommand") &&
            cfg.get_string("run", "subcommand") != sub) {
            std::fprintf(stderr, "config names subcommand '%s' but '%s' was invoked\n",
                         cfg.get_string("run", "subcommand").c_str(), sub.c_str());
            return 2;
        }
        cfg.set("run", "subcommand", sub);
        const int code = sub == "sweep" ? run_sweep(cfg, ctx) : run_config(cfg, ctx);
        if (code == 0)
            std::printf("ok: all assertions passed (manifest: %s/run.json)\n",
                        args.out.c_str());
        else
            std::fprintf(stderr, "run finished with exit code %d (see %s/run.json)\n",
                         code, args.out.c_str());
        return code;
    } catch (const semiwave::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semiwave: delayed reaction-diffusion wavefront laboratory"};
    app.require_subcommand(1);

    static const struct {
        const char* name;
        const char* help;
    } subs[] = {
        {"roots", "characteristic roots, speed thresholds, rate constants"},
        {"halanay", "scalar delay ODE trajectory + exponential bound check"},
        {"model", "birth-function constant table"},
        {"linear", "linear delayed PDE experiments (decay, asymptotic, solve)"},
        {"profile", "semi-wavefront profile relaxation"},
        {"stability", "leading-edge / global stability / uniqueness / comparison"},
        {"sweep", "run a subcommand across one parameter axis"},
    };

    CommonArgs args;
    std::string chosen;
    for (const auto& s : subs) {
        auto* cmd = app.add_subcommand(s.name, s.help);
        add_common(cmd, args);
        cmd->callback([&chosen, name = std::string(s.name)]() { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return execute(chosen, args);
}
