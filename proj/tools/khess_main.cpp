// Command-line front end: solves, identity suites, stability sweeps,
// bubbling measurements and inequality probes over domain description files.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "khess/cli.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> domains;
    int k = 0;
    double h = 0.0;
    int m = 0;
    std::string out_dir;
    std::string z_rule;
    long seed = -1;
    bool emit_solution = false;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->set_help_flag("--help", "print help");  // frees -h / --h for the grid spacing
    cmd->add_option("--config", f.config, "JSON run configuration (strict schema)");
    cmd->add_option("--domain", f.domains, "domain description file(s)");
    cmd->add_option("--k", f.k, "Hessian order k");
    cmd->add_option("--h", f.h, "grid spacing");
    cmd->add_option("--m", f.m, "boundary sample count");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--z-rule", f.z_rule, "z choice: inscribed | centroid");
    cmd->add_option("--seed", f.seed, "rng seed (reserved)");
    cmd->add_flag("--emit-solution", f.emit_solution, "dump the solution grid");
}

int dispatch(const std::string& command, const CommonFlags& f)
{
    khess::cli::RunConfig cfg;
    try {
        if (!f.config.empty()) cfg = khess::cli::load_config(f.config);
    } catch (const khess::io::ConfigError& e) {
        std::cerr << "[ERROR] " << e.what() << "\n";
        return khess::cli::kConfigError;
    }
    cfg.command = command;
    if (!f.domains.empty()) cfg.domains = f.domains;
    if (f.k > 0) cfg.k = f.k;
    if (f.h > 0.0) cfg.h = f.h;
    if (f.m > 0) cfg.m = f.m;
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (!f.z_rule.empty()) cfg.z_rule = f.z_rule;
    if (f.seed >= 0) cfg.seed = f.seed;
    if (f.emit_solution) cfg.emit_solution = true;
    return khess::cli::run(cfg);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"k-Hessian torsion problems: solves, integral identities, stability sweeps"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"solve",  "identities", "sbt",
                                               "sweep",  "bubbling",   "probes"};
    std::vector<CommonFlags> flags(commands.size());
    for (size_t i = 0; i < commands.size(); ++i) {
        add_common(app.add_subcommand(commands[i]), flags[i]);
    }

    CLI11_PARSE(app, argc, argv);

    for (size_t i = 0; i < commands.size(); ++i) {
        if (app.get_subcommand(commands[i])->parsed()) {
            return dispatch(commands[i], flags[i]);
        }
    }
    return khess::cli::kConfigError;
}
