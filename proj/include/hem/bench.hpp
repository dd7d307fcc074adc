#pragma once

#include <cstdint>
#include <iosfwd>

#include <hem/compiler.hpp>
#include <hem/reference.hpp>

namespace hem
{

// S(n) = sum_{i=1}^n (i+1)(i+3) / (i(i+2)(i+4)(i+6)), summed left to right; tends to 9/32.
double s_sum(std::uint64_t n);

inline constexpr std::uint64_t cpusec_terms = 60'000'000;

// Wall seconds for S(cpusec_terms): the CPU-sec unit. Best of `repeats`.
double calibrate_cpusec(int repeats = 3);

// Poincare iterations from random initial conditions in [0, pi] x [0, 5], repeated with fresh
// initial conditions each time.
struct BenchProtocol {
    std::uint64_t ics = 50;
    std::uint64_t iterations = 50'000;
    int repeats = 3;
    std::uint64_t seed = 1;

    void validate() const;
    std::uint64_t total_iterations() const noexcept
    {
        return ics * iterations;
    }
};

struct Timing {
    // Mean wall seconds per repeat.
    double seconds = 0;
    std::uint64_t iterations = 0;

    double per_second() const noexcept
    {
        return double(iterations) / seconds;
    }
};

// `batched` runs the initial conditions through BatchEvaluator, otherwise one at a time.
Timing bench_hem(const CompiledMap &cm, const BenchProtocol &protocol, bool batched = true);
Timing bench_ref(const OrbitParams &params, const RefSettings &settings, const BenchProtocol &protocol);

struct BenchReport {
    double s_n_time = 0;
    double hem_iters_per_cpusec = 0;
    double ref_equivalent_iters_per_cpusec = 0;
    // Batched HEM over the reference.
    double ratio = 0;
    double hem_scalar_iters_per_cpusec = 0;
    double scalar_ratio = 0;
    // Protocol time of HEM in CPU-sec (the per-repeat mean).
    double hem_cpusec = 0;
    double ref_tol = 0;
    std::uint64_t hem_iterations = 0;
    std::uint64_t ref_iterations = 0;
};

// `ref_protocol` may iterate fewer times than `hem_protocol`; throughputs are compared per iteration.
BenchReport bench(const CompiledMap &cm, const RefSettings &settings, const BenchProtocol &hem_protocol,
                  const BenchProtocol &ref_protocol);

void write_bench_keyvalue(std::ostream &out, const BenchReport &r);
void write_bench_csv(std::ostream &out, const BenchReport &r);

} // namespace hem
