#include <chrono>
#include <cmath>
#include <vector>
#include <ostream>

#include <hem/bench.hpp>
#include <hem/error.hpp>
#include <hem/rng.hpp>
#include <hem/runtime.hpp>

namespace hem
{

namespace
{

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0)
{
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

State bench_ic(const BenchProtocol &p, int repeat, std::uint64_t k)
{
    CounterStream rng(p.seed + static_cast<std::uint64_t>(repeat), k);
    const double u = rng.uniform();
    return {M_PI * u, 5 * rng.uniform()};
}

// Keeps results observable so the loops cannot be dropped.
volatile double bench_sink = 0;

} // namespace

double s_sum(std::uint64_t n)
{
    if (n < 1) {
        throw domain_error("S(n) needs n >= 1");
    }
    double s = 0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        const double i = double(k);
        s += (i + 1) * (i + 3) / (i * (i + 2) * (i + 4) * (i + 6));
    }
    return s;
}

double calibrate_cpusec(int repeats)
{
    double best = INFINITY;
    for (int r = 0; r < std::max(repeats, 1); ++r) {
        const auto t0 = clock_type::now();
        bench_sink = s_sum(cpusec_terms);
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

void BenchProtocol::validate() const
{
    if (ics < 1 || iterations < 1 || repeats < 1) {
        throw domain_error("benchmark protocol needs ics, iterations and repeats >= 1");
    }
}

Timing bench_hem(const CompiledMap &cm, const BenchProtocol &protocol, bool batched)
{
    protocol.validate();
    Evaluator ev(cm);
    BatchEvaluator batch(cm);
    std::vector<State> states(protocol.ics);
    std::vector<std::uint64_t> overflow(protocol.ics);
    double total = 0;
    for (int r = 0; r < protocol.repeats; ++r) {
        for (std::uint64_t k = 0; k < protocol.ics; ++k) {
            states[k] = bench_ic(protocol, r, k);
        }
        const auto t0 = clock_type::now();
        if (batched) {
            batch.advance(states, protocol.iterations, overflow);
        } else {
            for (std::uint64_t k = 0; k < protocol.ics; ++k) {
                ev.advance_checked(states[k], protocol.iterations);
            }
        }
        total += seconds_since(t0);
        bench_sink = states.back().x;
    }
    return {total / protocol.repeats, protocol.total_iterations()};
}

Timing bench_ref(const OrbitParams &params, const RefSettings &settings, const BenchProtocol &protocol)
{
    protocol.validate();
    settings.validate();
    double total = 0;
    for (int r = 0; r < protocol.repeats; ++r) {
        const auto t0 = clock_type::now();
        for (std::uint64_t k = 0; k < protocol.ics; ++k) {
            State s = bench_ic(protocol, r, k);
            for (std::uint64_t n = 0; n < protocol.iterations; ++n) {
                s = ref_integrate(s, 0, 2 * M_PI, params, settings).state;
            }
            bench_sink = s.x;
        }
        total += seconds_since(t0);
    }
    return {total / protocol.repeats, protocol.total_iterations()};
}

BenchReport bench(const CompiledMap &cm, const RefSettings &settings, const BenchProtocol &hem_protocol,
                  const BenchProtocol &ref_protocol)
{
    BenchReport r;
    hem_protocol.validate();
    ref_protocol.validate();
    if (hem_protocol.repeats != ref_protocol.repeats) {
        throw domain_error("HEM and reference protocols need the same number of repeats");
    }
    r.s_n_time = calibrate_cpusec();
    // Repeats are interleaved so that drifting host load hits both methods alike.
    Timing hem{0, hem_protocol.total_iterations()}, scalar = hem, ref{0, ref_protocol.total_iterations()};
    for (int k = 0; k < hem_protocol.repeats; ++k) {
        auto one = [k](BenchProtocol p) {
            p.seed += static_cast<std::uint64_t>(k);
            p.repeats = 1;
            return p;
        };
        hem.seconds += bench_hem(cm, one(hem_protocol), true).seconds / hem_protocol.repeats;
        scalar.seconds += bench_hem(cm, one(hem_protocol), false).seconds / hem_protocol.repeats;
        ref.seconds += bench_ref(cm.params, settings, one(ref_protocol)).seconds / ref_protocol.repeats;
    }
    r.hem_iterations = hem.iterations;
    r.ref_iterations = ref.iterations;
    r.hem_iters_per_cpusec = hem.per_second() * r.s_n_time;
    r.hem_scalar_iters_per_cpusec = scalar.per_second() * r.s_n_time;
    r.ref_equivalent_iters_per_cpusec = ref.per_second() * r.s_n_time;
    r.ratio = r.hem_iters_per_cpusec / r.ref_equivalent_iters_per_cpusec;
    r.scalar_ratio = r.hem_scalar_iters_per_cpusec / r.ref_equivalent_iters_per_cpusec;
    r.hem_cpusec = hem.seconds / r.s_n_time;
    r.ref_tol = settings.rel_tol;
    return r;
}

void write_bench_keyvalue(std::ostream &out, const BenchReport &r)
{
    const auto prec = out.precision(17);
    out << "s_n_time=" << r.s_n_time << '\n'
        << "hem_iters_per_cpusec=" << r.hem_iters_per_cpusec << '\n'
        << "ref_equivalent_iters_per_cpusec=" << r.ref_equivalent_iters_per_cpusec << '\n'
        << "ratio=" << r.ratio << '\n'
        << "hem_scalar_iters_per_cpusec=" << r.hem_scalar_iters_per_cpusec << '\n'
        << "scalar_ratio=" << r.scalar_ratio << '\n'
        << "hem_cpusec=" << r.hem_cpusec << '\n'
        << "ref_tol=" << r.ref_tol << '\n'
        << "hem_iterations=" << r.hem_iterations << '\n'
        << "ref_iterations=" << r.ref_iterations << '\n';
    out.precision(prec);
}

void write_bench_csv(std::ostream &out, const BenchReport &r)
{
    const auto prec = out.precision(17);
    out << "s_n_time,hem_iters_per_cpusec,ref_equivalent_iters_per_cpusec,ratio,hem_scalar_iters_per_cpusec,"
           "scalar_ratio,hem_cpusec,ref_tol,hem_iterations,ref_iterations\n"
        << r.s_n_time << ',' << r.hem_iters_per_cpusec << ',' << r.ref_equivalent_iters_per_cpusec << ',' << r.ratio
        << ',' << r.hem_scalar_iters_per_cpusec << ',' << r.scalar_ratio << ',' << r.hem_cpusec << ',' << r.ref_tol << ',' << r.hem_iterations << ',' << r.ref_iterations << '\n';
    out.precision(prec);
}

} // namespace hem
