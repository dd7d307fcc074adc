#include <algorithm>
#include <cmath>

#include <doctest.h>

#include <hem/analysis.hpp>
#include <hem/error.hpp>

#include "../support.hpp"

using namespace hem;

namespace
{

DerivedParams<double> sm()
{
    return derive_params<double>(test::mercury());
}

DerivedParams<double> em()
{
    return derive_params<double>(OrbitParams{0.0549, 1e-3, 1e-5});
}

bool within_4sf(double ours, double printed)
{
    return std::fabs(ours / printed - 1) < 5e-4;
}

bool subset(const std::vector<Ratio> &a, const std::vector<Ratio> &b)
{
    return std::all_of(a.begin(), a.end(), [&](const Ratio &r) { return std::find(b.begin(), b.end(), r) != b.end(); });
}

} // namespace

TEST_SUITE("analysis")
{
    TEST_CASE("first-order constants")
    {
        CHECK(within_4sf(k1(2, sm()), 2.557));
        CHECK(within_4sf(k1(3, sm()), 1.956));
        CHECK(within_4sf(k1(2, em()), 53.64));
        const auto d = sm();
        CHECK(k1(3, d) == doctest::Approx(2 * std::fabs(d.A(3)) / (d.alpha * std::fabs(3 - 2 * d.omega))));
    }

    TEST_CASE("second-order constants")
    {
        CHECK(within_4sf(k2(3, sm()), 1.058));
        CHECK(within_4sf(k2(5, em()), 6.386));
        // Hand expansion of the p = 3 sum: pairs (k, 3 - k) over the retained harmonics.
        const auto d = sm();
        double sum = 0;
        for (int k = -3; k <= 6; ++k) {
            const int q = 3 - k;
            if (is_harmonic(k) && is_harmonic(q)) {
                sum += d.A(k) * d.A(q) / double((3 - 2 * k) * (3 - 2 * k));
            }
        }
        CHECK(k2(3, d) == doctest::Approx(16 / (d.alpha * std::fabs(3 - 4 * d.omega)) * std::fabs(sum)).epsilon(1e-13));
    }

    TEST_CASE("threshold table")
    {
        const auto rows = resonance_thresholds(1e-3, sm());
        auto find = [&](int p, int q) {
            for (const auto &r : rows) {
                if (r.omega0 == Ratio(p, q)) {
                    return r.gamma;
                }
            }
            FAIL("missing row");
            return 0.0;
        };
        CHECK(within_4sf(find(1, 2), 9.880e-5));
        CHECK(within_4sf(find(3, 2), 1.956e-3));
        CHECK(within_4sf(find(3, 4), 1.058e-6));
        CHECK(within_4sf(find(7, 4), 2.673e-6));
        CHECK(std::is_sorted(rows.begin(), rows.end(),
                             [](const Threshold &a, const Threshold &b) { return a.omega0 < b.omega0; }));
        for (const auto &r : rows) {
            CHECK(r.K >= 0);
            const double scale = r.order == ResonanceOrder::first ? 1e-3 : 1e-6;
            CHECK(r.gamma == doctest::Approx(scale * r.K));
        }
    }

    TEST_CASE("existence sets")
    {
        const auto d = sm();
        const std::vector<Ratio> at5{{1, 2}, {1, 1}, {5, 4}, {3, 2}, {2, 1}, {5, 2}, {3, 1}};
        CHECK(existing_resonances(1e-3, 1e-5, d) == at5);
        const std::vector<Ratio> at6{{1, 2}, {3, 4}, {1, 1}, {5, 4}, {3, 2}, {7, 4}, {2, 1}, {5, 2}, {3, 1}, {7, 2}};
        CHECK(existing_resonances(1e-3, 1e-6, d) == at6);
        CHECK(existing_resonances(1e-3, 1e3, d).empty());
    }

    TEST_CASE("existence sets are monotone")
    {
        const auto d = sm();
        for (double g : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3}) {
            CHECK(subset(existing_resonances(1e-3, 10 * g, d), existing_resonances(1e-3, g, d)));
            CHECK(subset(existing_resonances(1e-4, g, d), existing_resonances(1e-3, g, d)));
        }
    }

    TEST_CASE("mu2")
    {
        CHECK(std::fabs(mu2(sm().omega, sm()) - 2.284502) < 1e-5);
        const auto circ = derive_params<double>(OrbitParams{0, 1e-3, 1e-5});
        CHECK(mu2(1.5, circ) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK_THROWS_AS(mu2(1.0, sm()), degenerate_error);
        CHECK(mu2(sm().omega, sm()) > 0);
    }

    TEST_CASE("predicted drift")
    {
        CHECK(delta_omega_pred(0, sm()) == 0.0);
        CHECK(delta_omega_pred(1e-3, sm()) == doctest::Approx(2.284502e-6).epsilon(5e-6));
        CHECK(delta_omega_pred(1e-6, sm()) == doctest::Approx(2.28e-12).epsilon(5e-3));
    }

    TEST_CASE("Goldreich-Peale")
    {
        const auto d = sm();
        CHECK(std::fabs(gp_probability(3, 1.8e-4, d) - 7.70) < 0.01);
        CHECK(std::fabs(gp_probability(3, 1e-3, d) - 17.24) < 0.01);
        double last = 100;
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-6, 1e-9, 1e-12}) {
            const double g = gp_probability(3, eps, d);
            CHECK(g > 0);
            CHECK(g < last);
            last = g;
        }
        CHECK(last < 1e-3);
        // No gamma anywhere in the formula.
        const auto d2 = derive_params<double>(test::mercury(1e-3, 1e-7));
        CHECK(gp_probability(3, 1e-3, d2) == gp_probability(3, 1e-3, d));
        CHECK_THROWS_AS(gp_probability(2, 1e-3, d), domain_error);
        CHECK_THROWS_AS(gp_probability(-1, 1e-3, d), domain_error);
    }

    TEST_CASE("Ratio is reduced")
    {
        CHECK(Ratio(6, 4) == Ratio(3, 2));
        CHECK(Ratio(4, 4) == Ratio(1, 1));
        CHECK(Ratio(3, 4) < Ratio(1, 1));
    }
}
