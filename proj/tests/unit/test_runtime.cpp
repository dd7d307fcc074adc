#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>
#include <omp.h>

#include <hem/error.hpp>
#include <hem/reference.hpp>
#include <hem/runtime.hpp>

#include "../support.hpp"

using namespace hem;

namespace
{

constexpr double two_pi = 2 * std::numbers::pi;

bool same_bits(const State &a, const State &b)
{
    return std::bit_cast<std::uint64_t>(a.x) == std::bit_cast<std::uint64_t>(b.x)
           && std::bit_cast<std::uint64_t>(a.y) == std::bit_cast<std::uint64_t>(b.y);
}

State reference(const State &s, double t0, double t1, const OrbitParams &p)
{
    return ref_integrate(s, t0, t1, p, RefSettings::extended_defaults()).state;
}

} // namespace

TEST_SUITE("runtime")
{
    TEST_CASE("free rotation is exact")
    {
        const auto cm = test::build_map(OrbitParams{0.2056, 0, 0}, 18, 28);
        Evaluator ev(cm);
        const double h = two_pi / 28;
        for (double y : {0.0, 0.5, 1.25, 3.0, 5.0}) {
            const State s{0.3, y};
            const State a = ev.eval_submap(1, s);
            CHECK(a.x == s.x + h * y);
            CHECK(a.y == y);
            const State p = ev.poincare(s);
            CHECK(std::fabs(p.x - (s.x + two_pi * y)) <= 1e-13 * (1 + std::fabs(p.x)));
            CHECK(p.y == y);
        }
    }

    TEST_CASE("eps = 0 sub-maps follow the exponential")
    {
        const OrbitParams p{0.2056, 0, 1e-5};
        const auto cm = test::build_map(p, 18, 28);
        const auto d = derive_params<double>(p);
        Evaluator ev(cm);
        const double h = two_pi / 28;
        for (double y : {0.0, 1.0, 2.2, 5.0}) {
            const State a = ev.eval_submap(7, State{1.0, y});
            CHECK(std::fabs(a.y - (d.omega + (y - d.omega) * std::exp(-d.gamma_alpha * h))) < 1e-15);
        }
    }

    TEST_CASE("sub-maps against the reference")
    {
        const auto p = test::mercury();
        const auto &cm = test::defaults_map();
        Evaluator ev(cm);
        const double h = two_pi / cm.M;
        const State s{1, 2};
        for (int i = 1; i <= cm.M; ++i) {
            const State a = ev.eval_submap(i, s);
            const State r = reference(s, (i - 1) * h, i * h, p);
            CHECK(std::fabs(a.x - r.x) < 1e-12);
            CHECK(std::fabs(a.y - r.y) < 1e-12);
        }
    }

    TEST_CASE("Poincare map at (pi/5, 1.2)")
    {
        const auto &cm = test::defaults_map();
        const State s{std::numbers::pi / 5, 1.2};
        const State a = poincare(cm, s);
        const State r = reference(s, 0, two_pi, test::mercury());
        MESSAGE("e_x = " << std::fabs(a.x - r.x));
        CHECK(std::fabs(a.x - r.x) < 4.1e-13);
        CHECK(std::fabs(a.y - r.y) < 4.1e-13);
    }

    TEST_CASE("pi-equivariance")
    {
        const auto &cm = test::defaults_map();
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> ux(0, std::numbers::pi), uy(0, 5);
        for (int k = 0; k < 50; ++k) {
            const State s{ux(rng), uy(rng)};
            const State a = poincare(cm, s);
            const State b = poincare(cm, State{s.x + std::numbers::pi, s.y});
            CHECK(std::fabs(b.x - a.x - std::numbers::pi) < 1e-13);
            CHECK(std::fabs(b.y - a.y) < 1e-13);
        }
    }

    TEST_CASE("leaving the guard band")
    {
        const auto &cm = test::defaults_map();
        Evaluator ev(cm, 50);
        CHECK_THROWS_AS(ev.poincare(State{0, 60}), overflow_error);
        State s{0, 60};
        CHECK(ev.advance_checked(s, 10) == 1);
        CHECK_THROWS_AS(ev.advance(State{0, -55}, 3), overflow_error);
        State ok{0.5, 1.5};
        CHECK(ev.advance_checked(ok, 10) == 0);
    }

    TEST_CASE("iterate")
    {
        const auto &cm = test::defaults_map();
        const State s0{0.3, 1.5};
        const auto one = iterate(cm, s0, 1);
        REQUIRE(one.samples.size() == 1);
        CHECK(same_bits(one.samples[0], poincare(cm, s0)));
        const auto tr = iterate(cm, s0, 100, 10);
        REQUIRE(tr.samples.size() == 10);
        Evaluator ev(cm);
        CHECK(same_bits(tr.samples.back(), ev.advance(s0, 100)));
        CHECK(same_bits(tr.samples[2], ev.advance(s0, 30)));
    }

    TEST_CASE("iterate, dissipative closed form")
    {
        const OrbitParams p{0.2056, 0, 1e-5};
        const auto cm = test::build_map(p, 18, 28);
        const auto d = derive_params<double>(p);
        const std::uint64_t n = 1000;
        const auto tr = iterate(cm, State{0, 5}, n, 100);
        for (std::size_t k = 0; k < tr.samples.size(); ++k) {
            const double m = double((k + 1) * 100);
            const double y = d.omega + (5 - d.omega) * std::exp(-two_pi * m * d.gamma_alpha);
            CHECK(std::fabs(tr.samples[k].y - y) <= 1e-12 * y);
        }
    }

    TEST_CASE("1e4 iterations against the reference")
    {
        const auto p = test::mercury();
        const auto &cm = test::defaults_map();
        Evaluator ev(cm);
        const State s0{0.3, 1.5};
        const std::uint64_t n = 10000;
        const State a = ev.advance(s0, n);
        // Restarting at each period keeps the oracle's time argument small.
        State r = s0;
        const auto settings = RefSettings::standard_defaults();
        for (std::uint64_t k = 0; k < n; ++k) {
            r = ref_integrate(r, 0, two_pi, p, settings).state;
        }
        MESSAGE("dx = " << std::fabs(a.x - r.x) << " dy = " << std::fabs(a.y - r.y));
        CHECK(std::fabs(a.x - r.x) < 1e-8);
        CHECK(std::fabs(a.y - r.y) < 1e-8);
    }

    TEST_CASE("composition of sub-maps equals the Poincare map")
    {
        const auto &cm = test::defaults_map();
        Evaluator ev(cm);
        const State s{2.1, 3.3};
        State t = s;
        for (int i = 1; i <= cm.M; ++i) {
            t = ev.eval_submap(i, t);
        }
        CHECK(same_bits(t, ev.poincare(s)));
    }

    TEST_CASE("batch lanes are bit-identical to the scalar evaluator")
    {
        const auto &cm = test::defaults_map();
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> ux(0, std::numbers::pi), uy(0, 5);
        for (std::size_t count : {1ul, 3ul, 8ul, 13ul, 24ul}) {
            std::vector<State> states(count);
            for (auto &s : states) {
                s = {ux(rng), uy(rng)};
            }
            // One lane is driven out of the guard band.
            if (count > 2) {
                states[1] = {0.2, 49.9};
            }
            auto batch = states;
            std::vector<std::uint64_t> over(count);
            BatchEvaluator be(cm);
            be.advance(batch, 200, over);
            Evaluator ev(cm);
            for (std::size_t k = 0; k < count; ++k) {
                State s = states[k];
                const auto at = ev.advance_checked(s, 200);
                CAPTURE(k);
                CHECK(over[k] == at);
                CHECK(same_bits(batch[k], s));
            }
        }
    }

    TEST_CASE("results do not depend on the thread count")
    {
        const auto &cm = test::defaults_map();
        std::vector<State> starts;
        for (int k = 0; k < 16; ++k) {
            starts.push_back({0.1 * k, 0.3 * k});
        }
        auto run = [&](int threads) {
            std::vector<State> out(starts.size());
#pragma omp parallel for num_threads(threads)
            for (std::size_t k = 0; k < starts.size(); ++k) {
                Evaluator ev(cm);
                out[k] = ev.advance(starts[k], 50);
            }
            return out;
        };
        const auto a = run(1), b = run(4);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(same_bits(a[k], b[k]));
        }
    }
}
