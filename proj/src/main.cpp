#include <string>

#include "CLI11.hpp"
#include "fraclab/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "fraclab — numerical laboratory for the first-and-half order evolution equation\n"
        "rho1 u_t + rho2 d_t^{1/2} u - L u = g with zero initial data"};
    app.set_version_flag("--version", "fraclab 0.1.0");
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* what;
    };
    const Sub subs[] = {
        {"forward", "solve the evolution equation and write solution artifacts"},
        {"reduce-check", "residuals of the reduced second-order-in-time equation"},
        {"carleman-check", "weighted-inequality ratio sweeps on seeded test fields"},
        {"invert", "reconstruct the source factor f from an observation-time snapshot"},
        {"stability-experiment", "noise-vs-error study with a fitted Hoelder exponent"},
    };

    std::string config_path;
    for (const Sub& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.what);
        cmd->add_option("config", config_path, "path to the run config (INI-style sections)")
            ->required();
    }

    CLI11_PARSE(app, argc, argv);
    return fraclab::run(app.get_subcommands().front()->get_name(), config_path);
}
