#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include <hem/scalar.hpp>

namespace hem
{

// Harmonics retained in the forcing term G(x, t) = sum_k A_k(e) sin(2x - k t).
inline constexpr std::array<int, 10> harmonics{-3, -2, -1, 1, 2, 3, 4, 5, 6, 7};

inline constexpr bool is_harmonic(int k) noexcept
{
    for (auto h : harmonics) {
        if (h == k) {
            return true;
        }
    }
    return false;
}

// Position of k in `harmonics`, or -1.
inline constexpr int harmonic_index(int k) noexcept
{
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        if (harmonics[i] == k) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

struct OrbitParams {
    double e = 0.2056;
    double eps = 1e-3;
    double gamma = 1e-5;

    // Throws domain_error unless 0 <= e < 1, eps >= 0 and gamma >= 0.
    void validate() const;
};

template <typename Real>
struct DerivedParams {
    Real alpha{};
    Real omega{};
    Real gamma_alpha{};
    // A_k(e), in the order of `harmonics`.
    std::array<Real, harmonics.size()> a{};

    // A_k for any integer k; zero outside the retained set.
    Real A(int k) const noexcept
    {
        const auto i = harmonic_index(k);
        return i < 0 ? Real(0) : a[static_cast<std::size_t>(i)];
    }
};

template <typename Real>
Real lbar(Real e);

template <typename Real>
Real nbar(Real e);

// A_k(e) from the exact rational-coefficient polynomials; zero if k is not retained.
template <typename Real>
Real harmonic_coefficient(int k, Real e);

template <typename Real>
DerivedParams<Real> derive_params(const OrbitParams &p);

struct State {
    double x = 0; // unwrapped angle
    double y = 0;

    friend bool operator==(const State &, const State &) = default;
};

// Right-hand side of the spin-orbit equation, (dx/dt, dy/dt).
std::pair<double, double> rhs(const State &s, double t, const DerivedParams<double> &d, const OrbitParams &p);

// The forcing term G(x, t).
double forcing(double x, double t, const DerivedParams<double> &d);

} // namespace hem
