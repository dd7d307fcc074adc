#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <doctest.h>

#include <hem/analysis.hpp>
#include <hem/error.hpp>
#include <hem/montecarlo.hpp>
#include <hem/reference.hpp>
#include <hem/rng.hpp>
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

} // namespace

TEST_SUITE("montecarlo")
{
    TEST_CASE("Philox4x32-10 known answers")
    {
        using C = Philox4x32::counter_type;
        CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
              == C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
              == C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("counter streams")
    {
        CounterStream a(5, 0), b(5, 0), c(5, 1), d(6, 0);
        for (int i = 0; i < 10; ++i) {
            const double u = a.uniform();
            CHECK(u >= 0);
            CHECK(u < 1);
            CHECK(u == b.uniform());
            CHECK(u != c.uniform());
            CHECK(u != d.uniform());
        }
    }

    TEST_CASE("sampling")
    {
        McConfig cfg;
        cfg.ics = 1;
        const auto one = sample_ics(cfg);
        REQUIRE(one.size() == 1);
        CHECK(one[0].x >= cfg.x_lo);
        CHECK(one[0].x < cfg.x_hi);
        CHECK(one[0].y >= cfg.y_lo);
        CHECK(one[0].y < cfg.y_hi);

        cfg.ics = 100000;
        cfg.y_lo = 1.5;
        const auto many = sample_ics(cfg);
        double mx = 0, my = 0;
        for (const auto &s : many) {
            mx += s.x;
            my += s.y;
        }
        mx /= double(cfg.ics);
        my /= double(cfg.ics);
        const double sx = (cfg.x_hi - cfg.x_lo) / std::sqrt(12.0 * double(cfg.ics));
        const double sy = (cfg.y_hi - cfg.y_lo) / std::sqrt(12.0 * double(cfg.ics));
        CHECK(std::fabs(mx - std::numbers::pi / 2) < 3 * sx);
        CHECK(std::fabs(my - 3.25) < 3 * sy);

        const auto again = sample_ics(cfg);
        CHECK(std::equal(many.begin(), many.end(), again.begin(), same_bits));
        CHECK(same_bits(sample_ic(cfg, 777), many[777]));
        cfg.seed = 2;
        CHECK_FALSE(same_bits(sample_ic(cfg, 0), many[0]));
    }

    TEST_CASE("configuration")
    {
        CHECK(default_n_pre(1e-5) == 1'000'000);
        CHECK(default_n_pre(1e-4) == 100'000);
        CHECK(default_n_pre(1e-9) == 50'000'000);
        McConfig cfg;
        CHECK_NOTHROW(cfg.validate());
        cfg.ics = 0;
        CHECK_THROWS_AS(cfg.validate(), domain_error);
        cfg = {};
        cfg.y_hi = cfg.y_lo;
        CHECK_THROWS_AS(cfg.validate(), domain_error);
    }

    TEST_CASE("labels and candidate grids")
    {
        CHECK(AttractorLabel{LabelKind::periodic, Ratio(3, 2), 1.5}.name() == "3/2");
        CHECK(AttractorLabel{LabelKind::periodic, Ratio(2, 1), 2}.name() == "2");
        CHECK(AttractorLabel{LabelKind::quasi_periodic, {}, 1.2558}.name() == "QP");
        CHECK(AttractorLabel{LabelKind::unresolved, {}, 0}.name() == "Unresolved");
        const auto grid = quarter_grid(5);
        CHECK(grid.size() == 20);
        CHECK(grid.front() == Ratio(1, 4));
        CHECK(grid.back() == Ratio(5, 1));
        CHECK(default_tol_rho(grid) == 0.02);
        const auto &cm = test::defaults_map();
        const double band = libration_band(Ratio(3, 2), cm);
        CHECK(band == doctest::Approx(4 * std::sqrt(2e-3 * std::fabs(cm.derived.A(3)))));
        CHECK(libration_band(Ratio(7, 4), cm) == 0.05);
    }

    TEST_CASE("confidence interval")
    {
        CHECK(ci_halfwidth(0.5, 1000) == doctest::Approx(0.031).epsilon(0.01));
        CHECK(ci_halfwidth(0.0, 1000) == 0.0);
    }

    TEST_CASE("pure relaxation is quasi-periodic at omega")
    {
        const OrbitParams p{0.2056, 0, 1e-3};
        const auto cm = test::build_map(p, 18, 28);
        McConfig cfg;
        cfg.n_win = 1024;
        for (State ic : {State{0.3, 0.2}, State{2.0, 4.5}}) {
            const auto c = classify(cm, ic, cfg, quarter_grid(5));
            CHECK(c.label.kind == LabelKind::quasi_periodic);
            CHECK(c.label.rho == doctest::Approx(cm.derived.omega).epsilon(1e-6));
        }
    }

    TEST_CASE("tabulation conserves counts")
    {
        std::vector<IcResult> rs;
        const char *names[] = {"3/2", "QP", "3/2", "1", "Unresolved", "QP", "3/2"};
        for (std::size_t k = 0; k < 7; ++k) {
            IcResult r;
            r.index = k;
            if (std::string(names[k]) == "QP") {
                r.result.label = {LabelKind::quasi_periodic, {}, 1.25};
            } else if (std::string(names[k]) == "Unresolved") {
                r.result.label = {LabelKind::unresolved, {}, 0};
            } else if (std::string(names[k]) == "1") {
                r.result.label = {LabelKind::periodic, Ratio(1, 1), 1};
            } else {
                r.result.label = {LabelKind::periodic, Ratio(3, 2), 1.5};
            }
            rs.push_back(r);
        }
        const auto t = tabulate(rs);
        CHECK(t.total == 7);
        std::uint64_t sum = 0;
        for (const auto &row : t.rows) {
            sum += row.count;
            CHECK(row.p_hat == doctest::Approx(double(row.count) / 7));
            CHECK(row.ci_halfwidth == doctest::Approx(ci_halfwidth(row.p_hat, 7)));
        }
        CHECK(sum == 7);
        REQUIRE(t.rows.size() == 4);
        CHECK(t.rows[0].label == "1");
        CHECK(t.rows[1].label == "3/2");
        CHECK(t.rows[2].label == "QP");
        CHECK(t.rows[3].label == "Unresolved");
        CHECK(t.find("3/2")->count == 3);
        CHECK(t.find("2") == nullptr);
    }

    TEST_CASE("seed and worker invariance")
    {
        const auto &cm = test::defaults_map();
        McConfig cfg;
        cfg.ics = 21;
        cfg.n_pre = 3000;
        cfg.n_win = 256;
        cfg.seed = 99;
        const auto cands = quarter_grid(5);
        const auto serial = estimate_probabilities_serial(cm, cfg, cands);
        for (int w : {1, 4}) {
            cfg.workers = w;
            const auto par = estimate_probabilities(cm, cfg, cands);
            REQUIRE(par.per_ic.size() == serial.per_ic.size());
            for (std::size_t k = 0; k < par.per_ic.size(); ++k) {
                CHECK(par.per_ic[k].index == k);
                CHECK(par.per_ic[k].result.label == serial.per_ic[k].result.label);
                CHECK(same_bits(par.per_ic[k].result.final_state, serial.per_ic[k].result.final_state));
            }
            std::ostringstream a, b;
            write_probability_csv(a, par);
            write_probability_csv(b, serial);
            CHECK(a.str() == b.str());
        }
    }

    TEST_CASE("single initial condition gives one row")
    {
        const auto &cm = test::defaults_map();
        McConfig cfg;
        cfg.ics = 1;
        cfg.n_pre = 100;
        cfg.n_win = 64;
        const auto t = estimate_probabilities(cm, cfg, quarter_grid(5));
        CHECK(t.total == 1);
        CHECK(t.rows.size() == 1);
        std::ostringstream out;
        write_ic_csv(out, t);
        const auto s = out.str();
        CHECK(s.rfind("index,x0,y0,label,rho\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 2);
    }

    TEST_CASE("inverse cubic fit recovers exact data")
    {
        std::vector<double> i, v;
        for (int k = 10; k <= 60; ++k) {
            i.push_back(k);
            v.push_back(2 + 3.0 / k - 1.0 / (k * k) + 0.5 / (double(k) * k * k));
        }
        CHECK(fit_inverse_cubic(i, v) == doctest::Approx(2).epsilon(1e-12));
    }

    TEST_CASE("omega' without forcing")
    {
        const OrbitParams p{0.2056, 0, 1e-5};
        const auto cm = test::build_map(p, 18, 28);
        SUBCASE("starting at omega the drift vanishes")
        {
            const auto fit = estimate_omega_prime(cm, State{0.1, cm.derived.omega}, 40000, 200);
            CHECK(std::fabs(fit.delta_omega) < 1e-10);
        }
        SUBCASE("too few blocks to fit")
        {
            CHECK_THROWS_AS(estimate_omega_prime(cm, State{0.1, 2.0}, 2000, 200), fit_error);
        }
        CHECK_THROWS_AS(estimate_omega_prime(cm, State{0.1, 2.0}, 100, 200), domain_error);
    }
}

TEST_SUITE("slow")
{
    TEST_CASE("capture near 3/2 agrees with the reference integrator")
    {
        // gamma = 1e-4 keeps the transient to 1e5 periods.
        const auto p = test::mercury(1e-3, 1e-4);
        const auto &cm = test::cached_map(p, 18, 28);
        const auto cands = existing_resonances(p.eps, p.gamma, cm.derived);
        McConfig cfg;
        cfg.n_win = 512;
        const auto n_pre = cfg.effective_n_pre(cm);
        int captured = 0;
        for (State ic : {State{0, 1.50}, State{1.0, 1.50}, State{2.0, 1.52}}) {
            const auto c = classify(cm, ic, cfg, cands);
            State r = ic;
            for (std::uint64_t k = 0; k < n_pre; ++k) {
                r = ref_integrate(r, 0, two_pi, p, RefSettings::standard_defaults()).state;
            }
            const State start = r;
            double y_dev = 0;
            for (int k = 0; k < 64; ++k) {
                r = ref_integrate(r, 0, two_pi, p, RefSettings::standard_defaults()).state;
                y_dev = std::max(y_dev, std::fabs(r.y - 1.5));
            }
            const double rho = (r.x - start.x) / (two_pi * 64);
            const bool ref_captured = std::fabs(rho - 1.5) < 1e-3 && y_dev < libration_band(Ratio(3, 2), cm);
            CAPTURE(ic.y);
            CHECK((c.label.kind == LabelKind::periodic && c.label.resonance == Ratio(3, 2)) == ref_captured);
            captured += ref_captured ? 1 : 0;
        }
        CHECK(captured >= 2);
    }
}
