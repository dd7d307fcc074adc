#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <hem/analysis.hpp>
#include <hem/error.hpp>

namespace hem
{

namespace
{

constexpr double resonance_tol = 1e-12;
constexpr double denominator_tol = 1e-9;

} // namespace

Ratio::Ratio(int num, int den)
{
    if (den == 0) {
        throw domain_error("ratio with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const int g = std::gcd(num, den);
    p = g == 0 ? 0 : num / g;
    q = g == 0 ? 1 : den / g;
}

double k1(int p, const DerivedParams<double> &d)
{
    if (!is_harmonic(p)) {
        throw domain_error("k1: p = " + std::to_string(p) + " is not a retained harmonic");
    }
    const double gap = std::fabs(p - 2 * d.omega);
    if (gap < resonance_tol) {
        throw degenerate_error("k1: p - 2 omega vanishes");
    }
    return 2 * std::fabs(d.A(p)) / (d.alpha * gap);
}

double k2(int p, const DerivedParams<double> &d)
{
    if (p % 2 == 0) {
        throw domain_error("k2: p must be odd");
    }
    const int lo = std::max(-3, p - 7);
    const int hi = std::min(7, p + 3);
    if (lo > hi) {
        throw domain_error("k2: empty summation range for p = " + std::to_string(p));
    }
    const double gap = std::fabs(p - 4 * d.omega);
    if (gap < resonance_tol) {
        throw degenerate_error("k2: p - 4 omega vanishes");
    }
    double sum = 0;
    for (int k = lo; k <= hi; ++k) {
        const double den = p - 2.0 * k;
        sum += d.A(k) * d.A(p - k) / (den * den);
    }
    return 16 / (d.alpha * gap) * std::fabs(sum);
}

std::vector<int> first_order_indices()
{
    return {harmonics.begin(), harmonics.end()};
}

std::vector<int> second_order_indices()
{
    // Odd p with a nonempty summation range: max(-3, p-7) <= min(7, p+3).
    std::vector<int> out;
    for (int p = -5; p <= 13; p += 2) {
        out.push_back(p);
    }
    return out;
}

std::vector<Threshold> resonance_thresholds(double eps, const DerivedParams<double> &d)
{
    if (!(eps > 0)) {
        throw domain_error("resonance thresholds need eps > 0");
    }
    std::vector<Threshold> out;
    for (int p : first_order_indices()) {
        const double K = k1(p, d);
        out.push_back({Ratio(p, 2), ResonanceOrder::first, p, K, eps * K});
    }
    for (int p : second_order_indices()) {
        const double K = k2(p, d);
        out.push_back({Ratio(p, 4), ResonanceOrder::second, p, K, eps * eps * K});
    }
    std::stable_sort(out.begin(), out.end(), [](const Threshold &a, const Threshold &b) { return a.omega0 < b.omega0; });
    return out;
}

std::vector<Ratio> existing_resonances(double eps, double gamma, const DerivedParams<double> &d)
{
    if (!(gamma > 0)) {
        throw domain_error("existing resonances need gamma > 0");
    }
    std::vector<Ratio> out;
    for (const auto &t : resonance_thresholds(eps, d)) {
        if (t.gamma > gamma) {
            out.push_back(t.omega0);
        }
    }
    return out;
}

double mu2(double omega_prime, const DerivedParams<double> &d)
{
    double sum = 0;
    for (int k : harmonics) {
        const double a = d.A(k);
        if (a == 0) {
            continue;
        }
        const double den = 2 * omega_prime - k;
        if (std::fabs(den) < denominator_tol) {
            throw degenerate_error("mu2: 2 omega' - " + std::to_string(k) + " vanishes");
        }
        sum += a * a / (den * den * den);
    }
    return sum;
}

double delta_omega_pred(double eps, const DerivedParams<double> &d)
{
    if (!(eps >= 0)) {
        throw domain_error("delta_omega_pred needs eps >= 0");
    }
    if (eps == 0) {
        return 0;
    }
    return eps * eps * mu2(d.omega, d);
}

double gp_probability(int p, double eps, const DerivedParams<double> &d)
{
    if (!is_harmonic(p)) {
        throw domain_error("gp_probability: p = " + std::to_string(p) + " is not a retained harmonic");
    }
    const double a = d.A(p);
    if (!(a > 0)) {
        throw domain_error("gp_probability needs A_p(e) > 0");
    }
    if (!(p / 2.0 > d.omega)) {
        throw domain_error("gp_probability needs p/2 > omega");
    }
    if (!(eps >= 0)) {
        throw domain_error("gp_probability needs eps >= 0");
    }
    if (eps == 0) {
        return 0;
    }
    return 100 * 2 / (1 + M_PI * (p / 2.0 - d.omega) / (2 * std::sqrt(2 * eps * a)));
}

} // namespace hem
