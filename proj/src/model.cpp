#include <cmath>
#include <string>

#include <hem/error.hpp>
#include <hem/model.hpp>

namespace hem
{

namespace
{

struct rational_term {
    int power;
    long long num;
    long long den;
};

struct harmonic_poly {
    int k;
    int n_terms;
    std::array<rational_term, 3> terms;
};

// A_k(e), truncated at O(e^6).
constexpr std::array<harmonic_poly, harmonics.size()> harmonic_table{{
    {-3, 1, {{{5, 81, 1280}}}},
    {-2, 1, {{{4, 1, 24}}}},
    {-1, 2, {{{3, 1, 48}, {5, 11, 768}}}},
    {1, 3, {{{1, -1, 2}, {3, 1, 16}, {5, -5, 384}}}},
    {2, 3, {{{0, 1, 1}, {2, -5, 2}, {4, 13, 16}}}},
    {3, 3, {{{1, 7, 2}, {3, -123, 16}, {5, 489, 128}}}},
    {4, 2, {{{2, 17, 2}, {4, -115, 6}}}},
    {5, 2, {{{3, 845, 48}, {5, -32525, 768}}}},
    {6, 1, {{{4, 533, 16}}}},
    {7, 1, {{{5, 228347, 3840}}}},
}};

template <typename Real>
void check_eccentricity(Real e)
{
    if (!(e >= Real(0) && e < Real(1))) {
        throw domain_error("eccentricity must lie in [0, 1)");
    }
}

template <typename Real>
Real ipow(Real b, int n)
{
    Real r(1);
    for (int i = 0; i < n; ++i) {
        r *= b;
    }
    return r;
}

} // namespace

void OrbitParams::validate() const
{
    check_eccentricity(e);
    if (!(eps >= 0) || !std::isfinite(eps)) {
        throw domain_error("eps must be finite and non-negative");
    }
    if (!(gamma >= 0) || !std::isfinite(gamma)) {
        throw domain_error("gamma must be finite and non-negative");
    }
}

template <typename Real>
Real lbar(Real e)
{
    check_eccentricity(e);
    const Real e2 = e * e;
    const Real w = Real(1) - e2;
    // (1 - e^2)^(9/2)
    const Real den = w * w * w * w * sqrt(w);
    return (Real(1) + Real(3) * e2 + Real(3) * e2 * e2 / Real(8)) / den;
}

template <typename Real>
Real nbar(Real e)
{
    check_eccentricity(e);
    const Real e2 = e * e;
    const Real w = Real(1) - e2;
    const Real num = Real(1) + Real(15) * e2 / Real(2) + Real(45) * e2 * e2 / Real(8) + Real(5) * e2 * e2 * e2 / Real(16);
    return num / (w * w * w * w * w * w);
}

template <typename Real>
Real harmonic_coefficient(int k, Real e)
{
    for (const auto &hp : harmonic_table) {
        if (hp.k != k) {
            continue;
        }
        Real r(0);
        for (int i = 0; i < hp.n_terms; ++i) {
            const auto &t = hp.terms[static_cast<std::size_t>(i)];
            r += Real(t.num) / Real(t.den) * ipow(e, t.power);
        }
        return r;
    }
    return Real(0);
}

template <typename Real>
DerivedParams<Real> derive_params(const OrbitParams &p)
{
    p.validate();
    const Real e(p.e);
    DerivedParams<Real> d;
    d.alpha = lbar(e);
    d.omega = nbar(e) / d.alpha;
    d.gamma_alpha = Real(p.gamma) * d.alpha;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        d.a[i] = harmonic_coefficient(harmonics[i], e);
    }
    return d;
}

double forcing(double x, double t, const DerivedParams<double> &d)
{
    double g = 0;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        g += d.a[i] * std::sin(2 * x - harmonics[i] * t);
    }
    return g;
}

std::pair<double, double> rhs(const State &s, double t, const DerivedParams<double> &d, const OrbitParams &p)
{
    return {s.y, -p.eps * forcing(s.x, t, d) - d.gamma_alpha * (s.y - d.omega)};
}

template double lbar(double);
template quad lbar(quad);
template double nbar(double);
template quad nbar(quad);
template double harmonic_coefficient(int, double);
template quad harmonic_coefficient(int, quad);
template DerivedParams<double> derive_params(const OrbitParams &);
template DerivedParams<quad> derive_params(const OrbitParams &);

} // namespace hem
