#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>

#include <hem/error.hpp>
#include <hem/series.hpp>

namespace hem
{

namespace
{

std::size_t index_of(long l)
{
    return static_cast<std::size_t>(std::labs(l));
}

// dst += scale * f * g, with f, g trigonometric polynomials in the same variable.
template <typename Real>
void trig_mul_acc(TrigPoly<Real> &dst, const TrigPoly<Real> &f, const TrigPoly<Real> &g, Real scale)
{
    if (f.is_zero() || g.is_zero()) {
        return;
    }
    dst.resize(f.size() + g.size() - 1);
    const Real half = scale / Real(2);
    for (std::size_t l = 0; l < f.size(); ++l) {
        const Real fc = f.cos_coeffs[l];
        const Real fs = f.sin_coeffs[l];
        if (fc == Real(0) && fs == Real(0)) {
            continue;
        }
        for (std::size_t m = 0; m < g.size(); ++m) {
            const Real gc = g.cos_coeffs[m];
            const Real gs = g.sin_coeffs[m];
            const auto sum = static_cast<long>(l + m);
            const auto diff = static_cast<long>(l) - static_cast<long>(m);
            if (fc != Real(0)) {
                if (gc != Real(0)) {
                    const Real v = half * fc * gc;
                    dst.add_cos(sum, v);
                    dst.add_cos(diff, v);
                }
                if (gs != Real(0)) {
                    const Real v = half * fc * gs;
                    dst.add_sin(sum, v);
                    dst.add_sin(diff, -v);
                }
            }
            if (fs != Real(0)) {
                if (gc != Real(0)) {
                    const Real v = half * fs * gc;
                    dst.add_sin(sum, v);
                    dst.add_sin(diff, v);
                }
                if (gs != Real(0)) {
                    const Real v = half * fs * gs;
                    dst.add_cos(diff, v);
                    dst.add_cos(sum, -v);
                }
            }
        }
    }
}

std::uint8_t bump(int v)
{
    if (v < 0 || v > std::numeric_limits<std::uint8_t>::max()) {
        throw resource_error("monomial exponent out of range");
    }
    return static_cast<std::uint8_t>(v);
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

template <typename Real>
void trig_tables(Real t0, std::size_t n, std::vector<Real> &cos_lt, std::vector<Real> &sin_lt)
{
    cos_lt.resize(n);
    sin_lt.resize(n);
    for (std::size_t l = 0; l < n; ++l) {
        const Real arg = Real(static_cast<long>(l)) * t0;
        cos_lt[l] = cos(arg);
        sin_lt[l] = sin(arg);
    }
}

} // namespace

// ---------------------------------------------------------------------------------------------
// TrigPoly

template <typename Real>
void TrigPoly<Real>::add_cos(long l, Real v)
{
    const auto i = index_of(l);
    resize(i + 1);
    cos_coeffs[i] += v;
}

template <typename Real>
void TrigPoly<Real>::add_sin(long l, Real v)
{
    if (l == 0) {
        return;
    }
    const auto i = index_of(l);
    resize(i + 1);
    sin_coeffs[i] += l < 0 ? -v : v;
}

template <typename Real>
void TrigPoly<Real>::trim()
{
    auto n = size();
    while (n > 0 && cos_coeffs[n - 1] == Real(0) && sin_coeffs[n - 1] == Real(0)) {
        --n;
    }
    cos_coeffs.resize(n);
    sin_coeffs.resize(n);
}

template <typename Real>
std::size_t TrigPoly<Real>::nonzeros() const noexcept
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < size(); ++l) {
        n += (cos_coeffs[l] != Real(0)) + (sin_coeffs[l] != Real(0));
    }
    return n;
}

template <typename Real>
Real TrigPoly<Real>::operator()(Real t) const
{
    Real r(0);
    for (std::size_t l = 0; l < size(); ++l) {
        const Real arg = Real(static_cast<long>(l)) * t;
        r += cos_coeffs[l] * cos(arg) + sin_coeffs[l] * sin(arg);
    }
    return r;
}

template <typename Real>
Real TrigPoly<Real>::evaluate(std::span<const Real> cos_lt, std::span<const Real> sin_lt) const
{
    Real r(0);
    for (std::size_t l = 0; l < size(); ++l) {
        r += cos_coeffs[l] * cos_lt[l] + sin_coeffs[l] * sin_lt[l];
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// DerivationParams

template <typename Real>
DerivationParams<Real> DerivationParams<Real>::from(const OrbitParams &p, bool track_eps)
{
    const auto d = derive_params<Real>(p);
    DerivationParams dp;
    dp.a = d.a;
    dp.eps = Real(p.eps);
    dp.gamma_alpha = d.gamma_alpha;
    dp.omega = d.omega;
    dp.track_eps = track_eps;
    return dp;
}

// ---------------------------------------------------------------------------------------------
// StatePoly

template <typename Real>
StatePoly<Real> StatePoly<Real>::constant(Real v)
{
    StatePoly p;
    if (v != Real(0)) {
        p.add(Monomial{}, 0, v, Real(0));
    }
    return p;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::var_y()
{
    StatePoly p;
    p.add(Monomial{1, 0, 0, 0}, 0, Real(1), Real(0));
    return p;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::var_c()
{
    StatePoly p;
    p.add(Monomial{0, 1, 0, 0}, 0, Real(1), Real(0));
    return p;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::var_s()
{
    StatePoly p;
    p.add(Monomial{0, 0, 1, 0}, 0, Real(1), Real(0));
    return p;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::harmonic_cos(int k)
{
    // cos(2x - kt) = c cos kt + s sin kt
    StatePoly p;
    p.add(Monomial{0, 1, 0, 0}, k, Real(1), Real(0));
    p.add(Monomial{0, 0, 1, 0}, k, Real(0), Real(1));
    p.normalize();
    return p;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::harmonic_sin(int k)
{
    // sin(2x - kt) = s cos kt - c sin kt
    StatePoly p;
    p.add(Monomial{0, 0, 1, 0}, k, Real(1), Real(0));
    p.add(Monomial{0, 1, 0, 0}, k, Real(0), Real(-1));
    p.normalize();
    return p;
}

template <typename Real>
std::size_t StatePoly<Real>::term_count() const noexcept
{
    std::size_t n = 0;
    for (const auto &[m, f] : m_terms) {
        n += f.nonzeros();
    }
    return n;
}

template <typename Real>
int StatePoly<Real>::max_trig_degree() const noexcept
{
    int d = 0;
    for (const auto &[m, f] : m_terms) {
        d = std::max(d, m.trig_degree());
    }
    return d;
}

template <typename Real>
void StatePoly<Real>::add(const Monomial &m, long l, Real cos_coeff, Real sin_coeff)
{
    auto &f = m_terms[m];
    f.add_cos(l, cos_coeff);
    f.add_sin(l, sin_coeff);
}

template <typename Real>
void StatePoly<Real>::add(const Monomial &m, const TrigPoly<Real> &f, Real scale)
{
    if (f.is_zero() || scale == Real(0)) {
        return;
    }
    auto &dst = m_terms[m];
    dst.resize(f.size());
    for (std::size_t l = 0; l < f.size(); ++l) {
        dst.cos_coeffs[l] += scale * f.cos_coeffs[l];
        dst.sin_coeffs[l] += scale * f.sin_coeffs[l];
    }
}

template <typename Real>
void StatePoly<Real>::normalize()
{
    for (auto it = m_terms.begin(); it != m_terms.end();) {
        it->second.trim();
        if (it->second.is_zero()) {
            it = m_terms.erase(it);
        } else {
            ++it;
        }
    }
}

template <typename Real>
StatePoly<Real> &StatePoly<Real>::operator+=(const StatePoly &other)
{
    for (const auto &[m, f] : other.m_terms) {
        add(m, f, Real(1));
    }
    normalize();
    return *this;
}

template <typename Real>
StatePoly<Real> &StatePoly<Real>::operator-=(const StatePoly &other)
{
    for (const auto &[m, f] : other.m_terms) {
        add(m, f, Real(-1));
    }
    normalize();
    return *this;
}

template <typename Real>
StatePoly<Real> &StatePoly<Real>::operator*=(Real v)
{
    for (auto &[m, f] : m_terms) {
        for (std::size_t l = 0; l < f.size(); ++l) {
            f.cos_coeffs[l] *= v;
            f.sin_coeffs[l] *= v;
        }
    }
    normalize();
    return *this;
}

template <typename Real>
StatePoly<Real> &StatePoly<Real>::operator/=(Real v)
{
    for (auto &[m, f] : m_terms) {
        for (std::size_t l = 0; l < f.size(); ++l) {
            f.cos_coeffs[l] /= v;
            f.sin_coeffs[l] /= v;
        }
    }
    normalize();
    return *this;
}

template <typename Real>
StatePoly<Real> StatePoly<Real>::multiply(const StatePoly &a, const StatePoly &b)
{
    StatePoly r;
    for (const auto &[ma, fa] : a.m_terms) {
        for (const auto &[mb, fb] : b.m_terms) {
            const Monomial m{bump(ma.y + mb.y), bump(ma.c + mb.c), bump(ma.s + mb.s), bump(ma.eps + mb.eps)};
            trig_mul_acc(r.slot(m), fa, fb, Real(1));
        }
    }
    r.normalize();
    return r;
}

template <typename Real>
Real StatePoly<Real>::evaluate(Real x, Real y, Real t, Real eps) const
{
    const Real c = cos(Real(2) * x);
    const Real s = sin(Real(2) * x);
    Real r(0);
    for (const auto &[m, f] : m_terms) {
        r += f(t) * ipow(y, m.y) * ipow(c, m.c) * ipow(s, m.s) * ipow(eps, m.eps);
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// Derivation and the Taylor stack

template <typename Real>
StatePoly<Real> poly_derive(const StatePoly<Real> &p, const DerivationParams<Real> &dp)
{
    // G = sum_k A_k sin(2x - kt) = s alpha(t) - c beta(t),
    // alpha = sum_k A_k cos kt, beta = sum_k A_k sin kt.
    TrigPoly<Real> alpha;
    TrigPoly<Real> beta;
    for (std::size_t i = 0; i < harmonics.size(); ++i) {
        alpha.add_cos(harmonics[i], dp.a[i]);
        beta.add_sin(harmonics[i], dp.a[i]);
    }
    alpha.trim();
    beta.trim();

    const bool eps_active = dp.track_eps || dp.eps != Real(0);
    const Real eps_factor = dp.track_eps ? Real(1) : dp.eps;
    const int eps_inc = dp.track_eps ? 1 : 0;

    StatePoly<Real> out;
    TrigPoly<Real> df;
    for (const auto &[m, f] : p.terms()) {
        // Explicit time dependence.
        df.cos_coeffs.assign(f.size(), Real(0));
        df.sin_coeffs.assign(f.size(), Real(0));
        for (std::size_t l = 0; l < f.size(); ++l) {
            const Real lr(static_cast<long>(l));
            df.cos_coeffs[l] = lr * f.sin_coeffs[l];
            df.sin_coeffs[l] = -lr * f.cos_coeffs[l];
        }
        out.add(m, df, Real(1));

        const int n = m.y;
        if (n > 0) {
            const Real nr(n);
            if (eps_active) {
                // n y^(n-1) * (-eps) (s alpha - c beta)
                const Monomial ms{bump(n - 1), m.c, bump(m.s + 1), bump(m.eps + eps_inc)};
                const Monomial mc{bump(n - 1), bump(m.c + 1), m.s, bump(m.eps + eps_inc)};
                trig_mul_acc(out.slot(ms), f, alpha, -nr * eps_factor);
                trig_mul_acc(out.slot(mc), f, beta, nr * eps_factor);
            }
            if (dp.gamma_alpha != Real(0)) {
                out.add(m, f, -nr * dp.gamma_alpha);
                if (dp.omega != Real(0)) {
                    out.add(Monomial{bump(n - 1), m.c, m.s, m.eps}, f, nr * dp.gamma_alpha * dp.omega);
                }
            }
        }
        if (m.c > 0) {
            // c^a -> a c^(a-1) (-2 y s)
            out.add(Monomial{bump(n + 1), bump(m.c - 1), bump(m.s + 1), m.eps}, f, Real(-2 * m.c));
        }
        if (m.s > 0) {
            // s^b -> b s^(b-1) (2 y c)
            out.add(Monomial{bump(n + 1), bump(m.c + 1), bump(m.s - 1), m.eps}, f, Real(2 * m.s));
        }
    }
    out.normalize();
    return out;
}

template <typename Real>
TaylorStack<Real> taylor_stack(const DerivationParams<Real> &dp, int N, std::size_t term_cap)
{
    if (N < 1) {
        throw domain_error("Taylor order N must be at least 1");
    }
    TaylorStack<Real> stack;
    stack.coeffs.resize(static_cast<std::size_t>(N) + 1);
    stack.coeffs[1] = StatePoly<Real>::var_y();
    for (int j = 1; j < N; ++j) {
        auto next = poly_derive(stack.coeffs[static_cast<std::size_t>(j)], dp);
        next /= Real(j + 1);
        if (next.term_count() > term_cap) {
            throw resource_error("Taylor coefficient a_" + std::to_string(j + 1) + " has " + std::to_string(next.term_count())
                                 + " terms, above the cap of " + std::to_string(term_cap));
        }
        stack.coeffs[static_cast<std::size_t>(j) + 1] = std::move(next);
    }
    return stack;
}

// ---------------------------------------------------------------------------------------------
// Time specialization and sub-maps

template <typename Real>
CsPoly<Real> specialize_time(const StatePoly<Real> &p, Real t0)
{
    std::size_t n = 0;
    for (const auto &[m, f] : p.terms()) {
        n = std::max(n, f.size());
    }
    std::vector<Real> cos_lt;
    std::vector<Real> sin_lt;
    trig_tables(t0, n, cos_lt, sin_lt);
    CsPoly<Real> out;
    for (const auto &[m, f] : p.terms()) {
        const Real v = f.evaluate(cos_lt, sin_lt);
        if (v != Real(0)) {
            out[m] += v;
        }
    }
    return out;
}

template <typename Real>
std::vector<CsPoly<Real>> specialize_time(const TaylorStack<Real> &stack, Real t0)
{
    std::vector<CsPoly<Real>> out;
    out.reserve(stack.coeffs.size());
    for (const auto &a : stack.coeffs) {
        out.push_back(specialize_time(a, t0));
    }
    return out;
}

template <typename Real>
Real evaluate(const CsPoly<Real> &p, Real x, Real y, Real eps)
{
    const Real c = cos(Real(2) * x);
    const Real s = sin(Real(2) * x);
    Real r(0);
    for (const auto &[m, v] : p) {
        r += v * ipow(y, m.y) * ipow(c, m.c) * ipow(s, m.s) * ipow(eps, m.eps);
    }
    return r;
}

template <typename Real>
std::size_t SubMapSet<Real>::term_count() const noexcept
{
    std::size_t n = 0;
    for (const auto &sm : submaps) {
        n += sm.term_count();
    }
    return n;
}

template <typename Real>
SubMapSet<Real> build_submaps(const TaylorStack<Real> &stack, const OrbitParams &p, int M, bool eps_tracked)
{
    if (M < 1) {
        throw domain_error("number of sub-maps M must be at least 1");
    }
    const int N = stack.order();
    SubMapSet<Real> set;
    set.params = p;
    set.N = N;
    set.M = M;
    set.eps_tracked = eps_tracked;

    const Real h = set.step();
    std::vector<Real> hpow(static_cast<std::size_t>(N) + 1);
    hpow[0] = Real(1);
    for (std::size_t j = 1; j < hpow.size(); ++j) {
        hpow[j] = hpow[j - 1] * h;
    }

    std::size_t nmax = 0;
    for (const auto &a : stack.coeffs) {
        for (const auto &[m, f] : a.terms()) {
            nmax = std::max(nmax, f.size());
        }
    }

    std::vector<Real> cos_lt;
    std::vector<Real> sin_lt;
    set.submaps.resize(static_cast<std::size_t>(M));
    for (int i = 1; i <= M; ++i) {
        auto &sm = set.submaps[static_cast<std::size_t>(i - 1)];
        sm.index = i;
        const Real t0 = Real(i - 1) * h;
        trig_tables(t0, nmax, cos_lt, sin_lt);

        // X - x = sum_{j=1}^{N} a_j h^j
        for (int j = 1; j <= N; ++j) {
            for (const auto &[m, f] : stack.coeffs[static_cast<std::size_t>(j)].terms()) {
                sm.X[m] += hpow[static_cast<std::size_t>(j)] * f.evaluate(cos_lt, sin_lt);
            }
        }
        // Y - y = sum_{j=1}^{N-1} (j+1) a_{j+1} h^j
        for (int j = 1; j + 1 <= N; ++j) {
            const Real w = Real(j + 1) * hpow[static_cast<std::size_t>(j)];
            for (const auto &[m, f] : stack.coeffs[static_cast<std::size_t>(j) + 1].terms()) {
                sm.Y[m] += w * f.evaluate(cos_lt, sin_lt);
            }
        }
        std::erase_if(sm.X, [](const auto &kv) { return kv.second == Real(0); });
        std::erase_if(sm.Y, [](const auto &kv) { return kv.second == Real(0); });
    }
    return set;
}

template <typename Real>
SubMapSet<Real> build_submaps(const OrbitParams &p, int N, int M, const SeriesOptions &opts)
{
    if (M < 1) {
        throw domain_error("number of sub-maps M must be at least 1");
    }
    const auto dp = DerivationParams<Real>::from(p, opts.track_eps);
    const auto stack = taylor_stack(dp, N, opts.term_cap);
    return build_submaps(stack, p, M, opts.track_eps);
}

// ---------------------------------------------------------------------------------------------
// Fourier form

template <typename Real>
std::pair<std::vector<Real>, std::vector<Real>> trig_power_harmonics(int a, int b)
{
    TrigPoly<Real> acc;
    acc.add_cos(0, Real(1));
    TrigPoly<Real> c;
    c.add_cos(1, Real(1));
    TrigPoly<Real> s;
    s.add_sin(1, Real(1));
    for (int i = 0; i < a + b; ++i) {
        TrigPoly<Real> next;
        trig_mul_acc(next, acc, i < a ? c : s, Real(1));
        next.trim();
        acc = std::move(next);
    }
    return {acc.cos_coeffs, acc.sin_coeffs};
}

template <typename Real>
FourierForm<Real> to_fourier(const SubMapPoly<Real> &sm)
{
    std::map<std::pair<int, int>, std::pair<std::vector<Real>, std::vector<Real>>> cache;
    auto expand = [&](const CsPoly<Real> &src, std::map<typename FourierForm<Real>::Key, Real> &dst) {
        for (const auto &[m, v] : src) {
            const auto key = std::make_pair(int(m.c), int(m.s));
            auto it = cache.find(key);
            if (it == cache.end()) {
                it = cache.emplace(key, trig_power_harmonics<Real>(m.c, m.s)).first;
            }
            const auto &[ch, sh] = it->second;
            for (std::size_t j = 0; j < ch.size(); ++j) {
                if (ch[j] != Real(0)) {
                    dst[{static_cast<int>(j), false, m.y, m.eps}] += v * ch[j];
                }
                if (sh[j] != Real(0)) {
                    dst[{static_cast<int>(j), true, m.y, m.eps}] += v * sh[j];
                }
            }
        }
        std::erase_if(dst, [](const auto &kv) { return kv.second == Real(0); });
    };
    FourierForm<Real> ff;
    expand(sm.X, ff.X);
    expand(sm.Y, ff.Y);
    return ff;
}

template <typename Real>
int FourierForm<Real>::max_harmonic() const noexcept
{
    int j = 0;
    for (const auto *part : {&X, &Y}) {
        for (const auto &[k, v] : *part) {
            j = std::max(j, k.harmonic);
        }
    }
    return j;
}

template <typename Real>
int FourierForm<Real>::min_eps_power(int j) const noexcept
{
    int e = -1;
    for (const auto *part : {&X, &Y}) {
        for (const auto &[k, v] : *part) {
            if (k.harmonic == j && (e < 0 || k.eps < e)) {
                e = k.eps;
            }
        }
    }
    return e;
}

template <typename Real>
Real FourierForm<Real>::block_bound(int j, Real y_max, Real eps) const
{
    Real b(0);
    for (const auto *part : {&X, &Y}) {
        for (const auto &[k, v] : *part) {
            if (k.harmonic == j) {
                b += abs(v) * ipow(y_max, k.y) * ipow(eps, k.eps);
            }
        }
    }
    return b;
}

template <typename Real>
int FourierForm<Real>::significant_harmonics(Real tol, Real y_max, Real eps) const
{
    int F = 0;
    for (int j = 1; j <= max_harmonic(); ++j) {
        if (block_bound(j, y_max, eps) >= tol) {
            F = j;
        }
    }
    return F;
}

namespace
{

template <typename Real, typename Map>
Real evaluate_fourier(const Map &part, Real x, Real y, Real eps)
{
    Real r(0);
    for (const auto &[k, v] : part) {
        const Real arg = Real(2 * k.harmonic) * x;
        r += v * ipow(y, k.y) * ipow(eps, k.eps) * (k.sine ? sin(arg) : cos(arg));
    }
    return r;
}

} // namespace

template <typename Real>
Real FourierForm<Real>::evaluate_X(Real x, Real y, Real eps) const
{
    return evaluate_fourier(X, x, y, eps);
}

template <typename Real>
Real FourierForm<Real>::evaluate_Y(Real x, Real y, Real eps) const
{
    return evaluate_fourier(Y, x, y, eps);
}

#define HEM_SERIES_INSTANTIATE(Real)                                                                                   \
    template struct TrigPoly<Real>;                                                                                    \
    template struct DerivationParams<Real>;                                                                            \
    template class StatePoly<Real>;                                                                                    \
    template StatePoly<Real> poly_derive(const StatePoly<Real> &, const DerivationParams<Real> &);                     \
    template TaylorStack<Real> taylor_stack(const DerivationParams<Real> &, int, std::size_t);                         \
    template CsPoly<Real> specialize_time(const StatePoly<Real> &, Real);                                              \
    template std::vector<CsPoly<Real>> specialize_time(const TaylorStack<Real> &, Real);                               \
    template Real evaluate(const CsPoly<Real> &, Real, Real, Real);                                                    \
    template struct SubMapSet<Real>;                                                                                   \
    template SubMapSet<Real> build_submaps(const OrbitParams &, int, int, const SeriesOptions &);                      \
    template SubMapSet<Real> build_submaps(const TaylorStack<Real> &, const OrbitParams &, int, bool);                 \
    template std::pair<std::vector<Real>, std::vector<Real>> trig_power_harmonics(int, int);                           \
    template FourierForm<Real> to_fourier(const SubMapPoly<Real> &);                                                   \
    template struct FourierForm<Real>;

HEM_SERIES_INSTANTIATE(double)
HEM_SERIES_INSTANTIATE(quad)

#undef HEM_SERIES_INSTANTIATE

} // namespace hem
