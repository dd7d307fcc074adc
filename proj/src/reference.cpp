#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include <hem/error.hpp>
#include <hem/reference.hpp>
#include <hem/runtime.hpp>

namespace hem
{

void RefSettings::validate() const
{
    if (order < 4) {
        throw domain_error("reference order must be at least 4");
    }
    if (!(rel_tol > 0) || !(abs_tol > 0)) {
        throw domain_error("reference tolerances must be positive");
    }
    if (!(safety > 0 && safety <= 1)) {
        throw domain_error("reference safety factor must lie in (0, 1]");
    }
}

namespace
{

template <typename Real>
struct Jet {
    std::vector<Real> x;
    std::vector<Real> y;
};

template <typename Real>
class JetBuilder
{
public:
    JetBuilder(const OrbitParams &p, int order) : m_order(order), m_d(derive_params<Real>(p)), m_eps(p.eps)
    {
        const auto n = static_cast<std::size_t>(order) + 1;
        m_alpha.resize(n);
        m_beta.resize(n);
        m_S.resize(n);
        m_C.resize(n);
        m_jet.x.resize(n);
        m_jet.y.resize(n);
    }

    const Jet<Real> &build(Real x, Real y, Real t)
    {
        const auto n = static_cast<std::size_t>(m_order) + 1;
        // Taylor coefficients of alpha(t) = sum A_k cos kt and beta(t) = sum A_k sin kt at t.
        std::fill(m_alpha.begin(), m_alpha.end(), Real(0));
        std::fill(m_beta.begin(), m_beta.end(), Real(0));
        for (std::size_t i = 0; i < harmonics.size(); ++i) {
            const Real k(harmonics[i]);
            const Real ck = cos(k * t);
            const Real sk = sin(k * t);
            Real w = m_d.a[i]; // A_k k^m / m!
            for (std::size_t m = 0; m < n; ++m) {
                switch (m % 4) {
                case 0:
                    m_alpha[m] += w * ck;
                    m_beta[m] += w * sk;
                    break;
                case 1:
                    m_alpha[m] -= w * sk;
                    m_beta[m] += w * ck;
                    break;
                case 2:
                    m_alpha[m] -= w * ck;
                    m_beta[m] -= w * sk;
                    break;
                default:
                    m_alpha[m] += w * sk;
                    m_beta[m] -= w * ck;
                    break;
                }
                w = w * k / Real(static_cast<long>(m) + 1);
            }
        }

        auto &X = m_jet.x;
        auto &Y = m_jet.y;
        X[0] = x;
        Y[0] = y;
        m_S[0] = sin(Real(2) * x);
        m_C[0] = cos(Real(2) * x);
        for (std::size_t m = 0; m + 1 < n; ++m) {
            if (m > 0) {
                // u = 2x: S' = u' C, C' = -u' S.
                Real s(0);
                Real c(0);
                for (std::size_t l = 1; l <= m; ++l) {
                    const Real lu = Real(static_cast<long>(2 * l)) * X[l];
                    s += lu * m_C[m - l];
                    c += lu * m_S[m - l];
                }
                m_S[m] = s / Real(static_cast<long>(m));
                m_C[m] = -c / Real(static_cast<long>(m));
            }
            Real g(0);
            for (std::size_t j = 0; j <= m; ++j) {
                g += m_S[j] * m_alpha[m - j] - m_C[j] * m_beta[m - j];
            }
            Real drift = Y[m];
            if (m == 0) {
                drift -= m_d.omega;
            }
            const Real inv = Real(1) / Real(static_cast<long>(m) + 1);
            Y[m + 1] = (-m_eps * g - m_d.gamma_alpha * drift) * inv;
            X[m + 1] = Y[m] * inv;
        }
        return m_jet;
    }

private:
    int m_order;
    DerivedParams<Real> m_d;
    Real m_eps;
    std::vector<Real> m_alpha;
    std::vector<Real> m_beta;
    std::vector<Real> m_S;
    std::vector<Real> m_C;
    Jet<Real> m_jet;
};

template <typename Real>
std::pair<Real, Real> sum_jet(const Jet<Real> &j, Real h)
{
    Real x(0);
    Real y(0);
    for (std::size_t m = j.x.size(); m-- > 0;) {
        x = x * h + j.x[m];
        y = y * h + j.y[m];
    }
    return {x, y};
}

template <typename Real>
Real estimate_step(const Jet<Real> &j, const RefSettings &st)
{
    const int p = st.order;
    const Real tol = Real(st.abs_tol) + Real(st.rel_tol) * abs(j.y[0]);
    Real h(std::numeric_limits<double>::infinity());
    for (int k : {p - 1, p}) {
        const auto ku = static_cast<std::size_t>(k);
        const Real norm = std::max(abs(j.x[ku]), abs(j.y[ku]));
        if (norm > Real(0)) {
            h = std::min(h, pow(tol / norm, Real(1) / Real(k)));
        }
    }
    return Real(st.safety) * h;
}

template <typename Real>
class Integrator
{
public:
    Integrator(const OrbitParams &p, const RefSettings &st) : m_st(st), m_builder(p, st.order)
    {
        st.validate();
    }

    // Returns the step taken.
    Real step(Real &x, Real &y, Real t, Real h_max)
    {
        const auto &j = m_builder.build(x, y, t);
        Real h = estimate_step(j, m_st);
        if (h < Real(min_ref_step) && h_max >= Real(min_ref_step)) {
            throw step_failure("reference step underflow at t = " + std::to_string(double(t)));
        }
        h = std::min(h, h_max);
        std::tie(x, y) = sum_jet(j, h);
        return h;
    }

    void fixed(Real &x, Real &y, Real t, Real h)
    {
        std::tie(x, y) = sum_jet(m_builder.build(x, y, t), h);
    }

    RefResult integrate(const State &s, double t0, double t1)
    {
        if (!(t1 >= t0)) {
            throw domain_error("ref_integrate needs t1 >= t0");
        }
        Real x(s.x);
        Real y(s.y);
        Real t(t0);
        const Real end(t1);
        RefResult r;
        while (t < end) {
            const Real remaining = end - t;
            const Real h = step(x, y, t, remaining);
            t = h == remaining ? end : t + h;
            ++r.steps;
        }
        r.state = {double(x), double(y)};
        return r;
    }

private:
    RefSettings m_st;
    JetBuilder<Real> m_builder;
};

void check_state(const State &s)
{
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) {
        throw domain_error("reference integrator needs a finite state");
    }
}

} // namespace

std::pair<std::vector<double>, std::vector<double>> ref_jet(const State &s, double t, const OrbitParams &p, int order)
{
    JetBuilder<double> b(p, order);
    const auto &j = b.build(s.x, s.y, t);
    return {j.x, j.y};
}

std::pair<State, double> ref_step(const State &s, double t, const OrbitParams &p, const RefSettings &settings,
                                  double h_max)
{
    check_state(s);
    if (settings.precision == Precision::extended) {
        Integrator<quad> in(p, settings);
        quad x = s.x;
        quad y = s.y;
        const quad h = in.step(x, y, quad(t), std::isinf(h_max) ? quad(1e300) : quad(h_max));
        return {{double(x), double(y)}, double(h)};
    }
    Integrator<double> in(p, settings);
    double x = s.x;
    double y = s.y;
    const double h = in.step(x, y, t, h_max);
    return {{x, y}, h};
}

State ref_step_fixed(const State &s, double t, double h, const OrbitParams &p, const RefSettings &settings)
{
    check_state(s);
    if (settings.precision == Precision::extended) {
        Integrator<quad> in(p, settings);
        quad x = s.x;
        quad y = s.y;
        in.fixed(x, y, quad(t), quad(h));
        return {double(x), double(y)};
    }
    Integrator<double> in(p, settings);
    double x = s.x;
    double y = s.y;
    in.fixed(x, y, t, h);
    return {x, y};
}

RefResult ref_integrate(const State &s, double t0, double t1, const OrbitParams &p, const RefSettings &settings)
{
    check_state(s);
    if (settings.precision == Precision::extended) {
        return Integrator<quad>(p, settings).integrate(s, t0, t1);
    }
    return Integrator<double>(p, settings).integrate(s, t0, t1);
}

namespace
{

GridPoint grid_point(const CompiledMap &cm, int L, int idx, const RefSettings &settings, Evaluator &ev)
{
    GridPoint g;
    g.i = idx / (L + 1);
    g.j = idx % (L + 1);
    g.x0 = g.i * M_PI / L;
    g.y0 = g.j * cm.y_max / L;
    const State s0{g.x0, g.y0};
    const auto hem = ev.poincare(s0);
    const auto ref = ref_integrate(s0, 0.0, 2 * M_PI, cm.params, settings).state;
    g.e_x = std::fabs(ref.x - hem.x);
    g.e_y = std::fabs(ref.y - hem.y);
    return g;
}

void summarize(ErrorGridReport &r)
{
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        if (r.points[k].e_x > r.max_ex) {
            r.max_ex = r.points[k].e_x;
            r.argmax_ex = k;
        }
        if (r.points[k].e_y > r.max_ey) {
            r.max_ey = r.points[k].e_y;
            r.argmax_ey = k;
        }
    }
}

ErrorGridReport grid_header(const CompiledMap &cm, int L, const RefSettings &settings)
{
    if (L < 2) {
        throw domain_error("error grid needs L >= 2");
    }
    settings.validate();
    ErrorGridReport r;
    r.L = L;
    r.x_max = M_PI;
    r.y_max = cm.y_max;
    r.points.resize(static_cast<std::size_t>((L + 1) * (L + 1)));
    return r;
}

} // namespace

ErrorGridReport error_grid(const CompiledMap &cm, int L, const RefSettings &settings)
{
    auto r = grid_header(cm, L, settings);
    const int n = static_cast<int>(r.points.size());
    std::string failure;
#pragma omp parallel
    {
        Evaluator ev(cm);
#pragma omp for schedule(dynamic)
        for (int k = 0; k < n; ++k) {
            try {
                r.points[static_cast<std::size_t>(k)] = grid_point(cm, L, k, settings, ev);
            } catch (const std::exception &e) {
#pragma omp critical
                failure = e.what();
            }
        }
    }
    if (!failure.empty()) {
        throw step_failure("error grid: " + failure);
    }
    summarize(r);
    return r;
}

ErrorGridReport error_grid_serial(const CompiledMap &cm, int L, const RefSettings &settings)
{
    auto r = grid_header(cm, L, settings);
    Evaluator ev(cm);
    for (std::size_t k = 0; k < r.points.size(); ++k) {
        r.points[k] = grid_point(cm, L, static_cast<int>(k), settings, ev);
    }
    summarize(r);
    return r;
}

void write_error_grid_csv(std::ostream &out, const ErrorGridReport &r)
{
    const auto old = out.precision(17);
    out << "i,j,x0,y0,e_x,e_y\n";
    for (const auto &g : r.points) {
        out << g.i << ',' << g.j << ',' << g.x0 << ',' << g.y0 << ',' << g.e_x << ',' << g.e_y << '\n';
    }
    out.precision(old);
}

} // namespace hem
