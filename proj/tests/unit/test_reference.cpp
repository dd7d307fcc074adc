#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include <hem/error.hpp>
#include <hem/reference.hpp>

#include "../support.hpp"

using namespace hem;

namespace
{
constexpr double two_pi = 2 * std::numbers::pi;
}

TEST_SUITE("reference")
{
    TEST_CASE("free rotation jet and steps")
    {
        const OrbitParams p{0.2056, 0, 0};
        const auto [xs, ys] = ref_jet(State{0.4, 1.7}, 0.3, p, 10);
        CHECK(xs[0] == 0.4);
        CHECK(xs[1] == 1.7);
        CHECK(ys[0] == 1.7);
        for (int j = 2; j <= 10; ++j) {
            CHECK(xs[std::size_t(j)] == 0.0);
        }
        for (int j = 1; j <= 10; ++j) {
            CHECK(ys[std::size_t(j)] == 0.0);
        }
        const auto [s, h] = ref_step(State{0.4, 1.7}, 0, p, RefSettings::standard_defaults(), 3.0);
        CHECK(h == 3.0);
        CHECK(s.x == 0.4 + 3.0 * 1.7);
        CHECK(s.y == 1.7);
    }

    TEST_CASE("jet against the equation")
    {
        const auto p = test::mercury();
        const auto d = derive_params<double>(p);
        const State s{0.9, 1.4};
        const double t = 0.6;
        const auto [xs, ys] = ref_jet(s, t, p, 6);
        const auto [dx, dy] = rhs(s, t, d, p);
        CHECK(xs[1] == doctest::Approx(dx).epsilon(1e-15));
        CHECK(ys[0] == s.y);
        CHECK(std::fabs(ys[1] - dy) < 1e-17);
        CHECK(xs[2] == doctest::Approx(ys[1] / 2).epsilon(1e-15));
    }

    TEST_CASE("zero interval is the identity")
    {
        const State s{0.3, 1.5};
        const auto r = ref_integrate(s, 1.0, 1.0, test::mercury(), RefSettings::standard_defaults());
        CHECK(r.state == s);
        CHECK(r.steps == 0);
    }

    TEST_CASE("dissipative closed form")
    {
        const OrbitParams p{0.2056, 0, 1e-5};
        const auto d = derive_params<double>(p);
        const double y = d.omega + (5 - d.omega) * std::exp(-two_pi * d.gamma_alpha);
        for (auto settings : {RefSettings::standard_defaults(), RefSettings::extended_defaults()}) {
            const auto r = ref_integrate(State{0, 5}, 0, two_pi, p, settings);
            CHECK(std::fabs(r.state.y - y) < 1e-14);
        }
    }

    TEST_CASE("halving the tolerance moves the endpoint by less than 1e-13")
    {
        const auto p = test::mercury();
        auto a = RefSettings::standard_defaults();
        auto b = a;
        b.rel_tol /= 2;
        b.abs_tol /= 2;
        const State s{0.3, 1.5};
        const auto ra = ref_integrate(s, 0, two_pi, p, a);
        const auto rb = ref_integrate(s, 0, two_pi, p, b);
        CHECK(std::fabs(ra.state.x - rb.state.x) < 1e-13);
        CHECK(std::fabs(ra.state.y - rb.state.y) < 1e-13);
        const auto re = ref_integrate(s, 0, two_pi, p, RefSettings::extended_defaults());
        CHECK(std::fabs(ra.state.x - re.state.x) < 1e-13);
    }

    TEST_CASE("fixed-step convergence order")
    {
        const auto p = test::mercury(1e-2, 1e-5);
        RefSettings low = RefSettings::standard_defaults();
        low.order = 6;
        const State s{0.7, 2.3};
        auto err = [&](double h) {
            const State a = ref_step_fixed(s, 0, h, p, low);
            const State r = ref_integrate(s, 0, h, p, RefSettings::extended_defaults()).state;
            return std::hypot(a.x - r.x, a.y - r.y);
        };
        const double e1 = err(0.4), e2 = err(0.2), e3 = err(0.1);
        const double slope = std::log2(e2 / e3);
        MESSAGE("errors " << e1 << " " << e2 << " " << e3 << ", slope " << slope);
        CHECK(slope > low.order + 1 - 1);
        CHECK(slope < low.order + 1 + 1);
    }

    TEST_CASE("grid: parallel equals serial, CSV layout")
    {
        const auto cm = test::build_map(test::mercury(), 12, 28);
        const auto a = error_grid(cm, 6, RefSettings::standard_defaults());
        const auto b = error_grid_serial(cm, 6, RefSettings::standard_defaults());
        REQUIRE(a.points.size() == 49);
        REQUIRE(b.points.size() == 49);
        for (std::size_t k = 0; k < a.points.size(); ++k) {
            CHECK(a.points[k].e_x == b.points[k].e_x);
            CHECK(a.points[k].e_y == b.points[k].e_y);
        }
        CHECK(a.max_ex == b.max_ex);
        CHECK(a.points[a.argmax_ex].e_x == a.max_ex);
        std::ostringstream out;
        write_error_grid_csv(out, a);
        const auto csv = out.str();
        CHECK(csv.rfind("i,j,x0,y0,e_x,e_y\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 50);
    }

    TEST_CASE("free rotation grid is exact to 1e-13")
    {
        const auto cm = test::build_map(OrbitParams{0.2056, 0, 0}, 18, 28);
        const auto r = error_grid(cm, 25, RefSettings::standard_defaults());
        CHECK(r.max_ex < 1e-13);
        CHECK(r.max_ey < 1e-13);
    }

    TEST_CASE("settings validation")
    {
        RefSettings s;
        s.order = 2;
        CHECK_THROWS_AS(s.validate(), domain_error);
        s = {};
        s.rel_tol = 0;
        CHECK_THROWS_AS(s.validate(), domain_error);
        s = {};
        s.safety = 1.5;
        CHECK_THROWS_AS(s.validate(), domain_error);
        CHECK_NOTHROW(RefSettings::extended_defaults().validate());
    }
}
