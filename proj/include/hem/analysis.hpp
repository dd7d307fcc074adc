#pragma once

#include <vector>

#include <hem/model.hpp>

namespace hem
{

// A rational rotation number p/q in lowest terms, q > 0.
struct Ratio {
    int p = 0;
    int q = 1;

    Ratio() = default;
    Ratio(int num, int den);

    double value() const noexcept
    {
        return static_cast<double>(p) / q;
    }
    friend bool operator==(const Ratio &, const Ratio &) = default;
    friend bool operator<(const Ratio &a, const Ratio &b) noexcept
    {
        return static_cast<long long>(a.p) * b.q < static_cast<long long>(b.p) * a.q;
    }
};

// First-order constant for the p/2 resonance, p a retained harmonic.
double k1(int p, const DerivedParams<double> &d);
// Second-order constant for the p/4 resonance, p odd.
double k2(int p, const DerivedParams<double> &d);

enum class ResonanceOrder { first, second };

struct Threshold {
    Ratio omega0;
    ResonanceOrder order = ResonanceOrder::first;
    int p = 0;
    double K = 0;
    // eps K for first order, eps^2 K for second order.
    double gamma = 0;
};

// Harmonic indices p of the first-order (p/2) and second-order (p/4) resonances considered.
std::vector<int> first_order_indices();
std::vector<int> second_order_indices();

// All thresholds, ordered by resonance value. Requires eps > 0.
std::vector<Threshold> resonance_thresholds(double eps, const DerivedParams<double> &d);

// Resonances whose threshold exceeds gamma, in increasing order.
std::vector<Ratio> existing_resonances(double eps, double gamma, const DerivedParams<double> &d);

// Second-order drift coefficient, sum_k A_k^2 / (2 omega' - k)^3.
double mu2(double omega_prime, const DerivedParams<double> &d);

// eps^2 mu2(omega): predicted omega - omega'.
double delta_omega_pred(double eps, const DerivedParams<double> &d);

// Averaged-theory capture probability (percent) into the p:2 resonance when spinning down from above.
double gp_probability(int p, double eps, const DerivedParams<double> &d);

} // namespace hem
