#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "commands.hpp"

using hem::cli::RunConfig;

namespace
{

void orbit_flags(CLI::App *app, RunConfig &cfg)
{
    app->add_option("--e", cfg.params.e, "orbital eccentricity")->check(CLI::Range(0.0, 0.999999));
    app->add_option("--epsilon", cfg.params.eps, "asymmetry parameter")->check(CLI::NonNegativeNumber);
    app->add_option("--gamma", cfg.params.gamma, "dissipation rate")->check(CLI::NonNegativeNumber);
}

void map_flag(CLI::App *app, RunConfig &cfg)
{
    app->add_option("--map", cfg.map, "compiled map file")->required()->check(CLI::ExistingFile);
}

CLI::Option *out_flag(CLI::App *app, RunConfig &cfg, const char *what)
{
    return app->add_option("--out", cfg.out, what);
}

void workers_flag(CLI::App *app, RunConfig &cfg)
{
    app->add_option("--workers", cfg.workers, "worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"High-order Euler method for the dissipative spin-orbit problem"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto *compile = app.add_subcommand("compile", "generate, prune and compile the Poincare map");
    orbit_flags(compile, cfg);
    compile->add_option("--N", cfg.N, "Taylor order")->check(CLI::Range(1, 64));
    compile->add_option("--M", cfg.M, "steps per period")->check(CLI::Range(1, 100000));
    compile->add_option("--tmax", cfg.T_max, "pruning threshold")->check(CLI::NonNegativeNumber);
    compile->add_option("--ymax", cfg.y_max, "pruning bound on |y|")->check(CLI::PositiveNumber);
    compile->add_option("--precision", cfg.precision, "series setup precision")
        ->check(CLI::IsMember({"double", "extended"}));
    compile->add_flag("--binary", cfg.binary, "write the binary map format");
    out_flag(compile, cfg, "map file to write")->required();

    auto *check = app.add_subcommand("check", "error grid against the reference integrator");
    map_flag(check, cfg);
    check->add_option("--grid-L", cfg.grid_L, "grid size L")->check(CLI::Range(1, 10000));
    check->add_option("--precision", cfg.precision, "reference precision")->check(CLI::IsMember({"double", "extended"}));
    check->add_option("--bound", cfg.bound, "pass bound on max(e_x, e_y)")->check(CLI::PositiveNumber);
    out_flag(check, cfg, "grid CSV");
    workers_flag(check, cfg);

    auto *mc = app.add_subcommand("mc", "Monte Carlo attractor probabilities");
    map_flag(mc, cfg);
    mc->add_option("--seed", cfg.seed, "64-bit seed");
    mc->add_option("--ics", cfg.ics, "number of initial conditions")->check(CLI::PositiveNumber);
    mc->add_option("--npre", cfg.n_pre, "transient iterations (0: 10/gamma)");
    mc->add_option("--nwin", cfg.n_win, "classification window")->check(CLI::Range(16ull, 1ull << 40));
    mc->add_option("--ylo", cfg.y_lo, "lower y of the sampling box");
    mc->add_option("--yhi", cfg.y_hi, "upper y of the sampling box");
    mc->add_option("--candidates", cfg.candidates, "predicted or all")->check(CLI::IsMember({"predicted", "all"}));
    mc->add_option("--per-ic", cfg.per_ic_out, "per-initial-condition CSV");
    out_flag(mc, cfg, "probability table CSV");
    workers_flag(mc, cfg);

    auto *omega = app.add_subcommand("omega-prime", "measure the quasi-periodic drift omega - omega'");
    map_flag(omega, cfg);
    omega->add_option("--n", cfg.n_iter, "total iterations")->check(CLI::PositiveNumber);
    omega->add_option("--block", cfg.block, "block size B")->check(CLI::PositiveNumber);
    omega->add_option("--x0", cfg.x0, "initial x");
    omega->add_option("--y0", cfg.y0, "initial y (default omega)");
    out_flag(omega, cfg, "block means CSV");

    auto *thresholds = app.add_subcommand("thresholds", "first- and second-order resonance thresholds");
    orbit_flags(thresholds, cfg);
    out_flag(thresholds, cfg, "threshold CSV");

    auto *gp = app.add_subcommand("gp", "averaged-theory capture probability");
    orbit_flags(gp, cfg);
    gp->add_option("--p", cfg.gp_p, "resonance p of p/2")->check(CLI::Range(-3, 7));
    out_flag(gp, cfg, "CSV");

    auto *bench = app.add_subcommand("bench", "HEM versus reference throughput in CPU-sec units");
    map_flag(bench, cfg);
    bench->add_option("--seed", cfg.seed, "64-bit seed");
    bench->add_option("--ics", cfg.bench_ics, "initial conditions")->check(CLI::PositiveNumber);
    bench->add_option("--iters", cfg.bench_iters, "HEM iterations per initial condition")->check(CLI::PositiveNumber);
    bench->add_option("--ref-iters", cfg.ref_iters, "reference iterations per initial condition")
        ->check(CLI::PositiveNumber);
    bench->add_option("--repeats", cfg.bench_repeats, "repetitions")->check(CLI::PositiveNumber);
    bench->add_option("--tol", cfg.ref_tol, "reference tolerance (default: measured grid error)");
    bench->add_option("--grid-L", cfg.grid_L, "grid size for the tolerance match")->check(CLI::Range(1, 10000));
    out_flag(bench, cfg, "report CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return hem::cli::usage;
    }

    return hem::cli::guarded(
        [&] {
            if (*compile) {
                return hem::cli::cmd_compile(cfg, std::cout);
            }
            if (*check) {
                return hem::cli::cmd_check(cfg, std::cout);
            }
            if (*mc) {
                return hem::cli::cmd_mc(cfg, std::cout);
            }
            if (*omega) {
                return hem::cli::cmd_omega_prime(cfg, std::cout);
            }
            if (*thresholds) {
                return hem::cli::cmd_thresholds(cfg, std::cout);
            }
            if (*gp) {
                return hem::cli::cmd_gp(cfg, std::cout);
            }
            return hem::cli::cmd_bench(cfg, std::cout);
        },
        std::cerr);
}
