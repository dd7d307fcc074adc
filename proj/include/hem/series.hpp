#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <hem/model.hpp>
#include <hem/scalar.hpp>

// Differential algebra for the Taylor coefficients of the spin-orbit flow.
//
// A StatePoly is a polynomial in y, c = cos 2x and s = sin 2x whose coefficients are
// trigonometric polynomials in t. This is a normal form for the algebra generated by y and the
// harmonic pairs c_k = cos(2x - kt), s_k = sin(2x - kt): substituting
//     c_k = c cos kt + s sin kt,    s_k = s cos kt - c sin kt
// is a ring map that commutes with the derivation, so evaluating a coefficient at t = t0 gives
// exactly the polynomial in (y, c, s) that expanding about t0 would produce. The identity
// c^2 + s^2 = 1 is never applied.

namespace hem
{

struct Monomial {
    std::uint8_t y = 0;
    std::uint8_t c = 0;
    std::uint8_t s = 0;
    // Power of eps; only nonzero when eps is tracked symbolically.
    std::uint8_t eps = 0;

    int trig_degree() const noexcept
    {
        return c + s;
    }

    friend auto operator<=>(const Monomial &, const Monomial &) = default;
};

// f(t) = sum_l cos_coeffs[l] cos(l t) + sin_coeffs[l] sin(l t), with sin_coeffs[0] == 0.
template <typename Real>
struct TrigPoly {
    std::vector<Real> cos_coeffs;
    std::vector<Real> sin_coeffs;

    std::size_t size() const noexcept
    {
        return cos_coeffs.size();
    }
    void resize(std::size_t n)
    {
        if (n > size()) {
            cos_coeffs.resize(n, Real(0));
            sin_coeffs.resize(n, Real(0));
        }
    }
    void add_cos(long l, Real v);
    void add_sin(long l, Real v);
    void trim();
    bool is_zero() const noexcept
    {
        return cos_coeffs.empty();
    }
    std::size_t nonzeros() const noexcept;
    Real operator()(Real t) const;
    // Evaluate from precomputed cos(l t0), sin(l t0) tables.
    Real evaluate(std::span<const Real> cos_lt, std::span<const Real> sin_lt) const;

    friend bool operator==(const TrigPoly &, const TrigPoly &) = default;
};

// Parameters entering the derivation. Built from OrbitParams, or by hand (tests use dyadic values
// so that algebraic identities can be checked exactly).
template <typename Real>
struct DerivationParams {
    std::array<Real, harmonics.size()> a{};
    Real eps{};
    Real gamma_alpha{};
    Real omega{};
    // Keep eps as a formal symbol (Monomial::eps) instead of multiplying it into coefficients.
    bool track_eps = false;

    static DerivationParams from(const OrbitParams &p, bool track_eps = false);
};

template <typename Real>
class StatePoly
{
public:
    using container_type = std::map<Monomial, TrigPoly<Real>>;

    StatePoly() = default;

    static StatePoly constant(Real v);
    static StatePoly var_y();
    static StatePoly var_c();
    static StatePoly var_s();
    // cos(2x - k t) and sin(2x - k t).
    static StatePoly harmonic_cos(int k);
    static StatePoly harmonic_sin(int k);

    const container_type &terms() const noexcept
    {
        return m_terms;
    }
    bool is_zero() const noexcept
    {
        return m_terms.empty();
    }
    // Number of nonzero (monomial, time harmonic) coefficients.
    std::size_t term_count() const noexcept;
    int max_trig_degree() const noexcept;

    // Accumulate v * m * [cos(l t) or sin(l t)].
    void add(const Monomial &m, long l, Real cos_coeff, Real sin_coeff);
    // Accumulate scale * m * f.
    void add(const Monomial &m, const TrigPoly<Real> &f, Real scale);
    // Coefficient of m, inserted as zero if absent. Call normalize() after writing through it.
    TrigPoly<Real> &slot(const Monomial &m)
    {
        return m_terms[m];
    }
    void normalize();

    StatePoly &operator+=(const StatePoly &other);
    StatePoly &operator-=(const StatePoly &other);
    StatePoly &operator*=(Real v);
    StatePoly &operator/=(Real v);
    friend StatePoly operator+(StatePoly a, const StatePoly &b)
    {
        return a += b;
    }
    friend StatePoly operator-(StatePoly a, const StatePoly &b)
    {
        return a -= b;
    }
    friend StatePoly operator*(StatePoly a, Real v)
    {
        return a *= v;
    }
    friend StatePoly operator*(const StatePoly &a, const StatePoly &b)
    {
        return multiply(a, b);
    }
    static StatePoly multiply(const StatePoly &a, const StatePoly &b);

    // Numeric value at (x, y, t); `eps` substitutes the formal symbol when it was tracked.
    Real evaluate(Real x, Real y, Real t, Real eps = Real(1)) const;

    friend bool operator==(const StatePoly &, const StatePoly &) = default;

private:
    container_type m_terms;
};

// The derivation D along the flow: D(y) = -eps G - gamma_alpha (y - omega),
// D(c) = -2 y s, D(s) = 2 y c, and d/dt on the time harmonics.
template <typename Real>
StatePoly<Real> poly_derive(const StatePoly<Real> &p, const DerivationParams<Real> &dp);

// a_0 .. a_N of x(t0 + tau) = sum_j a_j tau^j. coeffs[0] is left empty: it stands for the
// affine x term, which never enters the algebra.
template <typename Real>
struct TaylorStack {
    std::vector<StatePoly<Real>> coeffs;

    int order() const noexcept
    {
        return static_cast<int>(coeffs.size()) - 1;
    }
};

inline constexpr std::size_t default_term_cap = 1'000'000;

template <typename Real>
TaylorStack<Real> taylor_stack(const DerivationParams<Real> &dp, int N, std::size_t term_cap = default_term_cap);

// Polynomial in (y, c, s) [and the eps symbol] with scalar coefficients.
template <typename Real>
using CsPoly = std::map<Monomial, Real>;

template <typename Real>
CsPoly<Real> specialize_time(const StatePoly<Real> &p, Real t0);

template <typename Real>
std::vector<CsPoly<Real>> specialize_time(const TaylorStack<Real> &stack, Real t0);

template <typename Real>
Real evaluate(const CsPoly<Real> &p, Real x, Real y, Real eps = Real(1));

// One step of the fixed-step method, as polynomials:
//   X_i = x + X(y, c, s),   Y_i = y + Y(y, c, s).
// Both identity parts are kept out of the polynomials so that they stay exact.
template <typename Real>
struct SubMapPoly {
    int index = 1;
    CsPoly<Real> X;
    CsPoly<Real> Y;

    // Terms of X_i and Y_i, counting the identity parts x and y.
    std::size_t term_count() const noexcept
    {
        const bool y_merged = Y.contains(Monomial{1, 0, 0, 0});
        return X.size() + 1 + Y.size() + (y_merged ? 0 : 1);
    }
};

template <typename Real>
struct SubMapSet {
    OrbitParams params;
    int N = 0;
    int M = 0;
    bool eps_tracked = false;
    std::vector<SubMapPoly<Real>> submaps;

    Real step() const
    {
        return Real(2) * pi<Real>() / Real(M);
    }
    std::size_t term_count() const noexcept;
};

struct SeriesOptions {
    bool track_eps = false;
    std::size_t term_cap = default_term_cap;
};

template <typename Real>
SubMapSet<Real> build_submaps(const OrbitParams &p, int N, int M, const SeriesOptions &opts = {});

// Reuse one stack for several step counts M.
template <typename Real>
SubMapSet<Real> build_submaps(const TaylorStack<Real> &stack, const OrbitParams &p, int M, bool eps_tracked = false);

// Fourier form of a sub-map: coefficients of y^n eps^e cos(2jx) / sin(2jx).
template <typename Real>
struct FourierForm {
    struct Key {
        int harmonic = 0;
        bool sine = false;
        int y = 0;
        int eps = 0;

        friend auto operator<=>(const Key &, const Key &) = default;
    };

    std::map<Key, Real> X;
    std::map<Key, Real> Y;

    int max_harmonic() const noexcept;
    // Smallest eps exponent occurring in harmonic block j (of X or Y); -1 if the block is empty.
    int min_eps_power(int j) const noexcept;
    // Upper bound of block j over y in [0, y_max]: sum |coeff| y_max^n eps^e over X and Y.
    Real block_bound(int j, Real y_max, Real eps) const;
    // Largest j whose block bound reaches tol.
    int significant_harmonics(Real tol, Real y_max, Real eps) const;

    Real evaluate_X(Real x, Real y, Real eps = Real(1)) const;
    Real evaluate_Y(Real x, Real y, Real eps = Real(1)) const;
};

template <typename Real>
FourierForm<Real> to_fourier(const SubMapPoly<Real> &sm);

// cos^a(theta) sin^b(theta) = sum_j P_j cos(j theta) + Q_j sin(j theta), j = 0..a+b.
template <typename Real>
std::pair<std::vector<Real>, std::vector<Real>> trig_power_harmonics(int a, int b);

} // namespace hem
