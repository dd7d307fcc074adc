#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <hem/model.hpp>

namespace hem::cli
{

inline constexpr const char *artifact_version = "hem 1.0.0";

enum exit_code : int { ok = 0, usage = 1, check_failed = 2, resource = 3 };

struct RunConfig {
    OrbitParams params;
    int N = 18;
    int M = 28;
    double T_max = 1e-18;
    double y_max = 5;
    int grid_L = 25;
    // "double" or "extended": series setup precision for compile, oracle precision for check.
    std::string precision = "extended";
    std::string out;
    std::string map;
    bool binary = false;
    double bound = 1e-12;

    // Monte Carlo.
    std::uint64_t seed = 1;
    std::uint64_t ics = 1000;
    std::uint64_t n_pre = 0;
    std::uint64_t n_win = 4096;
    double y_lo = 0;
    double y_hi = 5;
    int workers = 0;
    // "predicted" uses the resonances existing at gamma; "all" every p/4 and p/2 in [0, y_hi].
    std::string candidates = "predicted";
    std::string per_ic_out;

    // omega-prime.
    std::uint64_t n_iter = 1'000'000;
    std::uint64_t block = 200;
    double x0 = 0;
    // Negative selects omega.
    double y0 = -1;

    // gp.
    int gp_p = 3;

    // bench.
    std::uint64_t bench_ics = 50;
    std::uint64_t bench_iters = 50'000;
    int bench_repeats = 3;
    std::uint64_t ref_iters = 2'000;
    // Non-positive: match the measured grid error of the map.
    double ref_tol = 0;

    // Throws domain_error on out-of-range values.
    void validate() const;
};

int cmd_compile(const RunConfig &cfg, std::ostream &out);
int cmd_check(const RunConfig &cfg, std::ostream &out);
int cmd_mc(const RunConfig &cfg, std::ostream &out);
int cmd_omega_prime(const RunConfig &cfg, std::ostream &out);
int cmd_thresholds(const RunConfig &cfg, std::ostream &out);
int cmd_gp(const RunConfig &cfg, std::ostream &out);
int cmd_bench(const RunConfig &cfg, std::ostream &out);

// Runs `f`, mapping library exceptions to exit codes with a one-line message on `err`.
template <typename F>
int guarded(F &&f, std::ostream &err);

} // namespace hem::cli

#include "commands_impl.hpp"
