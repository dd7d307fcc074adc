#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <omp.h>

#include <hem/error.hpp>
#include <hem/montecarlo.hpp>
#include <hem/rng.hpp>
#include <hem/runtime.hpp>

namespace hem
{

namespace
{

constexpr double two_pi = 2 * M_PI;
constexpr std::uint64_t n_pre_cap = 50'000'000;

struct Window {
    double x_start = 0;
    double x_end = 0;
    // Last tail + q_max states of the window, oldest first.
    std::deque<State> tail;
};

Classification overflowed(const State &s, std::uint64_t iteration)
{
    Classification out;
    out.label.kind = LabelKind::unresolved;
    out.final_state = s;
    out.diagnostic = "overflow at iteration " + std::to_string(iteration);
    return out;
}

bool label_less(const std::string &a, const std::string &b)
{
    auto rank = [](const std::string &s) { return s == "QP" ? 1 : s == "Unresolved" ? 2 : 0; };
    const int ra = rank(a);
    const int rb = rank(b);
    if (ra != rb || ra != 0) {
        return ra < rb;
    }
    auto parse = [](const std::string &s) {
        const auto slash = s.find('/');
        return Ratio(std::stoi(s.substr(0, slash)), slash == std::string::npos ? 1 : std::stoi(s.substr(slash + 1)));
    };
    return parse(a) < parse(b);
}

} // namespace

std::uint64_t default_n_pre(double gamma)
{
    if (!(gamma > 0)) {
        return n_pre_cap;
    }
    const double n = std::round(10.0 / gamma);
    return n >= double(n_pre_cap) ? n_pre_cap : std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

void McConfig::validate() const
{
    if (ics < 1) {
        throw domain_error("sample count must be at least 1");
    }
    if (n_win < 16) {
        throw domain_error("classification window must be at least 16");
    }
    if (!(x_lo < x_hi) || !(y_lo < y_hi) || !std::isfinite(x_hi - x_lo) || !std::isfinite(y_hi - y_lo)) {
        throw domain_error("empty or non-finite sampling box");
    }
    if (workers < 0) {
        throw domain_error("worker count must be non-negative");
    }
}

std::uint64_t McConfig::effective_n_pre(const CompiledMap &cm) const
{
    return n_pre > 0 ? n_pre : default_n_pre(cm.params.gamma);
}

State sample_ic(const McConfig &cfg, std::uint64_t k)
{
    CounterStream rng(cfg.seed, k);
    const double u = rng.uniform();
    const double v = rng.uniform();
    return {cfg.x_lo + (cfg.x_hi - cfg.x_lo) * u, cfg.y_lo + (cfg.y_hi - cfg.y_lo) * v};
}

std::vector<State> sample_ics(const McConfig &cfg)
{
    cfg.validate();
    std::vector<State> out;
    out.reserve(cfg.ics);
    for (std::uint64_t k = 0; k < cfg.ics; ++k) {
        out.push_back(sample_ic(cfg, k));
    }
    return out;
}

std::string AttractorLabel::name() const
{
    switch (kind) {
    case LabelKind::periodic:
        return resonance.q == 1 ? std::to_string(resonance.p)
                                : std::to_string(resonance.p) + "/" + std::to_string(resonance.q);
    case LabelKind::quasi_periodic:
        return "QP";
    case LabelKind::unresolved:
        break;
    }
    return "Unresolved";
}

std::vector<Ratio> quarter_grid(double hi)
{
    std::vector<Ratio> out;
    for (int p = 1; p <= static_cast<int>(std::floor(4 * hi + 1e-9)); ++p) {
        out.emplace_back(p, 4);
    }
    return out;
}

double default_tol_rho(const std::vector<Ratio> &candidates)
{
    auto v = candidates;
    std::sort(v.begin(), v.end());
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) {
        spacing = std::min(spacing, v[i].value() - v[i - 1].value());
    }
    return std::min(0.02, spacing / 4);
}

double libration_band(const Ratio &r, const CompiledMap &cm)
{
    double a = 0;
    if ((2 * r.p) % r.q == 0) {
        a = std::abs(cm.derived.A(2 * r.p / r.q));
    }
    return std::max(0.05, 4 * std::sqrt(2 * cm.params.eps * a));
}

Classification classify(const CompiledMap &cm, const State &ic, const McConfig &cfg, const std::vector<Ratio> &candidates,
                        const ClassifyOptions &opts)
{
    cfg.validate();
    Evaluator ev(cm);
    State s = ic;
    if (const auto k = ev.advance_checked(s, cfg.effective_n_pre(cm))) {
        return overflowed(s, k);
    }
    return classify_window(ev, s, cfg, candidates, opts);
}

Classification classify_window(Evaluator &ev, const State &start, const McConfig &cfg,
                               const std::vector<Ratio> &candidates, const ClassifyOptions &opts)
{
    const auto &cm = ev.map();
    const double tol_rho = opts.tol_rho > 0 ? opts.tol_rho : default_tol_rho(candidates);
    const std::size_t tail = static_cast<std::size_t>(std::max(opts.tail, 1));
    int q_max = 1;
    for (const auto &c : candidates) {
        q_max = std::max(q_max, c.q);
    }
    const std::size_t keep = tail + static_cast<std::size_t>(q_max);

    Classification out;
    out.label.kind = LabelKind::unresolved;
    Window w;
    State s = start;
    w.x_start = s.x;
    for (std::uint64_t n = 0; n < cfg.n_win; ++n) {
        if (const auto k = ev.advance_checked(s, 1)) {
            return overflowed(s, cfg.effective_n_pre(cm) + n + k);
        }
        if (cfg.n_win - n <= keep) {
            w.tail.push_back(s);
        }
    }
    w.x_end = s.x;
    out.final_state = s;
    const double rho = (w.x_end - w.x_start) / (two_pi * double(cfg.n_win));
    out.label.rho = rho;

    for (const auto &c : candidates) {
        if (!(std::abs(rho - c.value()) < tol_rho)) {
            continue;
        }
        const double band = libration_band(c, cm);
        const std::size_t first = w.tail.size() - std::min(tail, w.tail.size());
        std::size_t in_band = 0;
        for (std::size_t i = first; i < w.tail.size(); ++i) {
            in_band += std::abs(w.tail[i].y - c.value()) < band;
        }
        const std::size_t n_tail = w.tail.size() - first;
        if (in_band == 0) {
            continue;
        }
        if (in_band < n_tail) {
            out.diagnostic = "y leaves the libration band of " + std::to_string(c.p) + "/" + std::to_string(c.q);
            return out;
        }
        // q-step return over the tail, using the states that have a successor q steps later.
        std::size_t tested = 0;
        std::size_t returned = 0;
        const auto q = static_cast<std::size_t>(c.q);
        for (std::size_t i = w.tail.size() >= n_tail + q ? w.tail.size() - n_tail - q : 0; i + q < w.tail.size(); ++i) {
            ++tested;
            returned += std::abs(w.tail[i + q].x - w.tail[i].x - two_pi * c.p) < opts.tol_x;
        }
        if (tested > 0 && returned == tested) {
            out.label.kind = LabelKind::periodic;
            out.label.resonance = c;
            return out;
        }
        if (returned > 0) {
            out.diagnostic = "partial return to " + std::to_string(c.p) + "/" + std::to_string(c.q);
            return out;
        }
    }
    out.label.kind = LabelKind::quasi_periodic;
    return out;
}

double ci_halfwidth(double p_hat, std::uint64_t n)
{
    return 1.96 * std::sqrt(p_hat * (1 - p_hat) / double(n));
}

const ProbabilityRow *ProbabilityTable::find(const std::string &label) const
{
    for (const auto &r : rows) {
        if (r.label == label) {
            return &r;
        }
    }
    return nullptr;
}

ProbabilityTable tabulate(std::vector<IcResult> results)
{
    std::sort(results.begin(), results.end(), [](const IcResult &a, const IcResult &b) { return a.index < b.index; });
    ProbabilityTable t;
    t.total = results.size();
    std::map<std::string, std::uint64_t, decltype(&label_less)> counts(&label_less);
    for (const auto &r : results) {
        ++counts[r.result.label.name()];
    }
    for (const auto &[label, n] : counts) {
        ProbabilityRow row;
        row.label = label;
        row.count = n;
        row.p_hat = t.total ? double(n) / double(t.total) : 0.0;
        row.ci_halfwidth = t.total ? ci_halfwidth(row.p_hat, t.total) : 0.0;
        row.reliable = double(t.total) * row.p_hat >= 5;
        t.rows.push_back(row);
    }
    t.per_ic = std::move(results);
    return t;
}

ProbabilityTable estimate_probabilities(const CompiledMap &cm, const McConfig &cfg, const std::vector<Ratio> &candidates,
                                        const ClassifyOptions &opts)
{
    cfg.validate();
    const std::uint64_t n_pre = cfg.effective_n_pre(cm);
    std::vector<IcResult> results(cfg.ics);
    // Fixed chunks of ics share one batched transient; every lane matches the scalar path bit for bit,
    // so the result depends neither on the chunking nor on the thread count.
    const auto chunks = static_cast<std::int64_t>((cfg.ics + batch_lanes - 1) / batch_lanes);
    const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        BatchEvaluator batch(cm);
        Evaluator ev(cm);
        std::vector<State> states;
        std::vector<std::uint64_t> overflow;
#pragma omp for schedule(dynamic, 1)
        for (std::int64_t chunk = 0; chunk < chunks; ++chunk) {
            const std::uint64_t first = static_cast<std::uint64_t>(chunk) * batch_lanes;
            const std::uint64_t last = std::min<std::uint64_t>(first + batch_lanes, cfg.ics);
            states.clear();
            for (std::uint64_t k = first; k < last; ++k) {
                auto &r = results[k];
                r.index = k;
                r.ic = sample_ic(cfg, k);
                states.push_back(r.ic);
            }
            overflow.assign(states.size(), 0);
            batch.advance(states, n_pre, overflow);
            for (std::uint64_t k = first; k < last; ++k) {
                const auto j = k - first;
                results[k].result = overflow[j] ? overflowed(states[j], overflow[j])
                                                : classify_window(ev, states[j], cfg, candidates, opts);
            }
        }
    }
    return tabulate(std::move(results));
}

ProbabilityTable estimate_probabilities_serial(const CompiledMap &cm, const McConfig &cfg,
                                               const std::vector<Ratio> &candidates, const ClassifyOptions &opts)
{
    cfg.validate();
    std::vector<IcResult> results;
    results.reserve(cfg.ics);
    for (std::uint64_t k = 0; k < cfg.ics; ++k) {
        const auto ic = sample_ic(cfg, k);
        results.push_back({k, ic, classify(cm, ic, cfg, candidates, opts)});
    }
    return tabulate(std::move(results));
}

double fit_inverse_cubic(const std::vector<double> &i, const std::vector<double> &v)
{
    if (i.size() != v.size() || i.size() < 4) {
        throw fit_error("inverse-cubic fit needs at least 4 points");
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(i.size()), 4);
    Eigen::VectorXd b(static_cast<Eigen::Index>(i.size()));
    for (std::size_t k = 0; k < i.size(); ++k) {
        const double r = 1 / i[k];
        const auto row = static_cast<Eigen::Index>(k);
        A(row, 0) = 1;
        A(row, 1) = r;
        A(row, 2) = r * r;
        A(row, 3) = r * r * r;
        b(row) = v[k];
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    return sol(0);
}

OmegaPrimeFit estimate_omega_prime(const CompiledMap &cm, const State &ic, std::uint64_t n, std::uint64_t block)
{
    if (block < 1 || n < 10 * block) {
        throw domain_error("need block >= 1 and n >= 10 * block");
    }
    Evaluator ev(cm);
    OmegaPrimeFit fit;
    const std::uint64_t blocks = n / block;
    State s = ic;
    fit.block_means.reserve(blocks);
    for (std::uint64_t i = 1; i <= blocks; ++i) {
        s = ev.advance(s, block);
        fit.block_means.push_back((s.x - ic.x) / (two_pi * double(i * block)));
    }

    std::vector<double> pi_, pv, ti, tv;
    const auto &m = fit.block_means;
    for (std::size_t k = startup_blocks + 1; k + 1 < m.size(); ++k) {
        const double idx = double(k + 1);
        if (m[k] > m[k - 1] && m[k] > m[k + 1]) {
            pi_.push_back(idx);
            pv.push_back(m[k]);
        } else if (m[k] < m[k - 1] && m[k] < m[k + 1]) {
            ti.push_back(idx);
            tv.push_back(m[k]);
        }
    }
    fit.n_peaks = pv.size();
    fit.n_troughs = tv.size();
    const std::size_t tail = m.size() > startup_blocks ? m.size() - startup_blocks : 0;
    if (fit.n_peaks + fit.n_troughs < min_extrema && tail >= 2 * min_extrema) {
        // No oscillation to average out (pure relaxation): fit every block after the startup.
        std::vector<double> ai, av;
        for (std::size_t k = startup_blocks; k < m.size(); ++k) {
            ai.push_back(double(k + 1));
            av.push_back(m[k]);
        }
        fit.a0_peaks = fit.a0_troughs = fit_inverse_cubic(ai, av);
        fit.delta_omega = cm.derived.omega - fit.a0_peaks;
        fit.omega_prime = fit.a0_peaks;
        return fit;
    }
    if (fit.n_peaks < min_extrema || fit.n_troughs < min_extrema) {
        std::ostringstream msg;
        msg << "too few extrema for the omega' fit: " << fit.n_peaks << " peaks, " << fit.n_troughs << " troughs";
        throw fit_error(msg.str());
    }
    fit.a0_peaks = fit_inverse_cubic(pi_, pv);
    fit.a0_troughs = fit_inverse_cubic(ti, tv);
    fit.delta_omega = cm.derived.omega - (fit.a0_peaks + fit.a0_troughs) / 2;
    fit.omega_prime = cm.derived.omega - fit.delta_omega;
    return fit;
}

void write_ic_csv(std::ostream &out, const ProbabilityTable &t)
{
    const auto prec = out.precision(17);
    out << "index,x0,y0,label,rho\n";
    for (const auto &r : t.per_ic) {
        out << r.index << ',' << r.ic.x << ',' << r.ic.y << ',' << r.result.label.name() << ',' << r.result.label.rho
            << '\n';
    }
    out.precision(prec);
}

void write_probability_csv(std::ostream &out, const ProbabilityTable &t)
{
    const auto prec = out.precision(10);
    out << "label,count,p_hat,ci_halfwidth,reliable\n";
    for (const auto &r : t.rows) {
        out << r.label << ',' << r.count << ',' << r.p_hat << ',' << r.ci_halfwidth << ',' << (r.reliable ? 1 : 0)
            << '\n';
    }
    out.precision(prec);
}

} // namespace hem
