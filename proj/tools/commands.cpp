#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include <omp.h>

#include <hem/analysis.hpp>
#include <hem/bench.hpp>
#include <hem/compiler.hpp>
#include <hem/error.hpp>
#include <hem/montecarlo.hpp>
#include <hem/reference.hpp>
#include <hem/runtime.hpp>
#include <hem/series.hpp>

#include "commands.hpp"

namespace hem::cli
{

namespace
{

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class Manifest
{
public:
    explicit Manifest(const std::string &command)
    {
        add("version", artifact_version);
        add("command", command);
    }
    Manifest &add(const std::string &k, const std::string &v)
    {
        m_text << "# " << k << '=' << v << '\n';
        return *this;
    }
    Manifest &add(const std::string &k, double v)
    {
        return add(k, num(v));
    }
    Manifest &add(const std::string &k, std::uint64_t v)
    {
        return add(k, std::to_string(v));
    }
    Manifest &add(const std::string &k, int v)
    {
        return add(k, std::to_string(v));
    }
    Manifest &params(const OrbitParams &p)
    {
        return add("e", p.e).add("epsilon", p.eps).add("gamma", p.gamma);
    }
    Manifest &map(const CompiledMap &cm, const std::string &path)
    {
        return add("map", path)
            .params(cm.params)
            .add("N", cm.N)
            .add("M", cm.M)
            .add("tmax", cm.T_max)
            .add("ymax", cm.y_max)
            .add("map_hash", hex64(map_hash(cm)));
    }
    std::string str() const
    {
        return m_text.str();
    }

private:
    std::ostringstream m_text;
};

std::ofstream open_out(const std::string &path)
{
    std::ofstream f(path);
    if (!f) {
        throw io_error("cannot open " + path + " for writing");
    }
    f.precision(17);
    return f;
}

void write_file(const std::string &path, const Manifest &m, const std::string &body)
{
    if (path.empty()) {
        return;
    }
    auto f = open_out(path);
    f << m.str() << body;
    if (!f) {
        throw io_error("write to " + path + " failed");
    }
}

RefSettings ref_settings(const std::string &precision)
{
    return precision == "extended" ? RefSettings::extended_defaults() : RefSettings::standard_defaults();
}

void set_workers(int workers)
{
    if (workers > 0) {
        omp_set_num_threads(workers);
    }
}

std::vector<Ratio> mc_candidates(const RunConfig &cfg, const CompiledMap &cm)
{
    if (cfg.candidates == "all") {
        return quarter_grid(cfg.y_hi);
    }
    return existing_resonances(cm.params.eps, cm.params.gamma, cm.derived);
}

std::string ratio_name(const Ratio &r)
{
    return r.q == 1 ? std::to_string(r.p) : std::to_string(r.p) + "/" + std::to_string(r.q);
}

} // namespace

void RunConfig::validate() const
{
    params.validate();
    if (N < 1 || M < 1) {
        throw domain_error("N and M must be positive");
    }
    if (!(T_max >= 0) || !(y_max > 0)) {
        throw domain_error("tmax must be >= 0 and ymax > 0");
    }
    if (grid_L < 1) {
        throw domain_error("grid-L must be positive");
    }
    if (precision != "double" && precision != "extended") {
        throw domain_error("precision must be double or extended");
    }
    if (candidates != "predicted" && candidates != "all") {
        throw domain_error("candidates must be predicted or all");
    }
    if (!(bound > 0)) {
        throw domain_error("bound must be positive");
    }
    if (ics < 1 || n_win < 16 || block < 1 || !(y_lo < y_hi) || workers < 0) {
        throw domain_error("need ics >= 1, nwin >= 16, block >= 1, ylo < yhi, workers >= 0");
    }
    if (n_iter < 10 * block) {
        throw domain_error("omega-prime needs n >= 10 * block");
    }
    if (bench_ics < 1 || bench_iters < 1 || bench_repeats < 1 || ref_iters < 1) {
        throw domain_error("bench sizes must be positive");
    }
}

int cmd_compile(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (cfg.out.empty()) {
        throw domain_error("compile needs --out");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const CompiledMap cm = cfg.precision == "extended"
                               ? compile(build_submaps<quad>(cfg.params, cfg.N, cfg.M), cfg.T_max, cfg.y_max)
                               : compile(build_submaps<double>(cfg.params, cfg.N, cfg.M), cfg.T_max, cfg.y_max);
    const double setup = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_map(cm, cfg.out, cfg.binary);

    Manifest m("compile");
    m.map(cm, cfg.out).add("precision", cfg.precision).add("binary", cfg.binary ? 1 : 0);
    write_file(cfg.out + ".manifest", m, "");

    const auto naive = cm.naive_ops();
    const auto horner = cm.horner_ops();
    out << m.str();
    char line[160];
    auto row = [&](const char *label, const std::string &v) {
        std::snprintf(line, sizeof line, "%-44s %s\n", label, v.c_str());
        out << line;
    };
    row("N, M", std::to_string(cm.N) + ", " + std::to_string(cm.M));
    std::snprintf(line, sizeof line, "%.3f", setup);
    row("Setup time (s)", line);
    row("Total no. of terms, before/after pruning", std::to_string(cm.terms_unpruned) + "/" +
                                                          std::to_string(cm.terms_pruned()));
    row("+/x operations (pruned, not Horner)", std::to_string(naive.adds) + "/" + std::to_string(naive.muls));
    row("+/x operations (pruned, Horner form)", std::to_string(horner.adds) + "/" + std::to_string(horner.muls));
    row("Registers", std::to_string(cm.register_count()));
    row("Map file", cfg.out);
    return ok;
}

int cmd_check(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (cfg.map.empty()) {
        throw domain_error("check needs --map");
    }
    const auto cm = load_map(cfg.map);
    set_workers(cfg.workers);
    const auto report = error_grid(cm, cfg.grid_L, ref_settings(cfg.precision));
    Manifest m("check");
    m.map(cm, cfg.map).add("grid_L", cfg.grid_L).add("precision", cfg.precision).add("bound", cfg.bound);
    std::ostringstream csv;
    write_error_grid_csv(csv, report);
    write_file(cfg.out, m, csv.str());

    const bool pass = report.max_ex <= cfg.bound && report.max_ey <= cfg.bound;
    const auto &px = report.points[report.argmax_ex];
    const auto &py = report.points[report.argmax_ey];
    out << m.str() << "max e_x = " << num(report.max_ex) << " at (" << num(px.x0) << ", " << num(px.y0) << ")\n"
        << "max e_y = " << num(report.max_ey) << " at (" << num(py.x0) << ", " << num(py.y0) << ")\n"
        << "[max (e_x, e_y)] x 1e-14 = (" << std::setprecision(3) << report.max_ex * 1e14 << ", "
        << report.max_ey * 1e14 << ")\n"
        << (pass ? "PASS" : "FAIL") << ": bound " << num(cfg.bound) << '\n';
    return pass ? ok : check_failed;
}

int cmd_mc(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (cfg.map.empty()) {
        throw domain_error("mc needs --map");
    }
    const auto cm = load_map(cfg.map);
    McConfig mc;
    mc.y_lo = cfg.y_lo;
    mc.y_hi = cfg.y_hi;
    mc.ics = cfg.ics;
    mc.n_pre = cfg.n_pre;
    mc.n_win = cfg.n_win;
    mc.seed = cfg.seed;
    mc.workers = cfg.workers;
    const auto candidates = mc_candidates(cfg, cm);
    const auto table = estimate_probabilities(cm, mc, candidates);

    Manifest m("mc");
    std::string cand;
    for (const auto &c : candidates) {
        cand += (cand.empty() ? "" : " ") + ratio_name(c);
    }
    m.map(cm, cfg.map)
        .add("seed", cfg.seed)
        .add("ics", cfg.ics)
        .add("npre", mc.effective_n_pre(cm))
        .add("nwin", cfg.n_win)
        .add("ylo", cfg.y_lo)
        .add("yhi", cfg.y_hi)
        .add("candidates", cand);
    std::ostringstream csv;
    write_probability_csv(csv, table);
    write_file(cfg.out, m, csv.str());
    std::ostringstream per_ic;
    write_ic_csv(per_ic, table);
    write_file(cfg.per_ic_out, m, per_ic.str());

    out << m.str();
    char line[120];
    std::snprintf(line, sizeof line, "%-12s %8s %10s %10s %s\n", "label", "count", "P (%)", "+/- (%)", "reliable");
    out << line;
    for (const auto &r : table.rows) {
        std::snprintf(line, sizeof line, "%-12s %8llu %10.2f %10.2f %s\n", r.label.c_str(),
                      static_cast<unsigned long long>(r.count), 100 * r.p_hat, 100 * r.ci_halfwidth,
                      r.reliable ? "yes" : "no");
        out << line;
    }
    return ok;
}

int cmd_omega_prime(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (cfg.map.empty()) {
        throw domain_error("omega-prime needs --map");
    }
    const auto cm = load_map(cfg.map);
    const State ic{cfg.x0, cfg.y0 < 0 ? cm.derived.omega : cfg.y0};
    const auto fit = estimate_omega_prime(cm, ic, cfg.n_iter, cfg.block);
    const double pred = delta_omega_pred(cm.params.eps, cm.derived);

    Manifest m("omega-prime");
    m.map(cm, cfg.map).add("x0", ic.x).add("y0", ic.y).add("n", cfg.n_iter).add("block", cfg.block);
    std::ostringstream csv;
    csv.precision(17);
    csv << "i,omega_i\n";
    for (std::size_t i = 0; i < fit.block_means.size(); ++i) {
        csv << i + 1 << ',' << fit.block_means[i] << '\n';
    }
    write_file(cfg.out, m, csv.str());
    out << m.str() << "omega = " << num(cm.derived.omega) << '\n'
        << "omega' = " << num(fit.omega_prime) << '\n'
        << "delta_omega = " << num(fit.delta_omega) << '\n'
        << "delta_omega_pred = " << num(pred) << '\n'
        << "a0 peaks = " << num(fit.a0_peaks) << " (" << fit.n_peaks << " peaks)\n"
        << "a0 troughs = " << num(fit.a0_troughs) << " (" << fit.n_troughs << " troughs)\n";
    return ok;
}

int cmd_thresholds(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (!(cfg.params.eps > 0)) {
        throw domain_error("thresholds need epsilon > 0");
    }
    const auto d = derive_params<double>(cfg.params);
    const auto all = resonance_thresholds(cfg.params.eps, d);
    Manifest m("thresholds");
    m.params(cfg.params);
    std::ostringstream csv;
    csv.precision(17);
    csv << "omega0,order,p,K,threshold,exists\n";
    for (const auto &t : all) {
        csv << ratio_name(t.omega0) << ',' << (t.order == ResonanceOrder::first ? 1 : 2) << ',' << t.p << ',' << t.K
            << ',' << t.gamma << ',' << (t.gamma > cfg.params.gamma ? 1 : 0) << '\n';
    }
    write_file(cfg.out, m, csv.str());

    out << m.str();
    char cell[32];
    for (const auto order : {ResonanceOrder::first, ResonanceOrder::second}) {
        std::string head = "omega0 ";
        std::string vals = "       ";
        for (const auto &t : all) {
            if (t.order != order || t.p < 1) {
                continue;
            }
            std::snprintf(cell, sizeof cell, "%10s ", ratio_name(t.omega0).c_str());
            head += cell;
            const bool starred = order == ResonanceOrder::first && t.omega0 == Ratio(3, 2);
            std::snprintf(cell, sizeof cell, "%10.3e%c", t.gamma, starred ? '*' : ' ');
            vals += cell;
        }
        out << head << '\n' << vals << '\n';
    }
    out << "* eps K1(3); the published table prints this entry as 1.1956e-3, a misprint of 1.956e-3.\n";
    out << "Existing at gamma = " << num(cfg.params.gamma) << ":";
    for (const auto &r : existing_resonances(cfg.params.eps, cfg.params.gamma, d)) {
        out << ' ' << ratio_name(r);
    }
    out << '\n';
    return ok;
}

int cmd_gp(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    const auto d = derive_params<double>(cfg.params);
    const double p = gp_probability(cfg.gp_p, cfg.params.eps, d);
    Manifest m("gp");
    m.params(cfg.params).add("p", cfg.gp_p);
    write_file(cfg.out, m, "p,probability_percent\n" + std::to_string(cfg.gp_p) + "," + num(p) + "\n");
    char line[120];
    std::snprintf(line, sizeof line, "P_GP(%d/2) = %.2f %% (%s)\n", cfg.gp_p, p, num(p).c_str());
    out << m.str() << line;
    return ok;
}

int cmd_bench(const RunConfig &cfg, std::ostream &out)
{
    cfg.validate();
    if (cfg.map.empty()) {
        throw domain_error("bench needs --map");
    }
    const auto cm = load_map(cfg.map);
    double tol = cfg.ref_tol;
    if (!(tol > 0)) {
        const auto grid = error_grid(cm, cfg.grid_L, RefSettings::extended_defaults());
        tol = std::max(grid.max_ex, grid.max_ey);
    }
    RefSettings settings = RefSettings::standard_defaults();
    settings.rel_tol = settings.abs_tol = tol;
    const BenchProtocol hem_p{cfg.bench_ics, cfg.bench_iters, cfg.bench_repeats, cfg.seed};
    const BenchProtocol ref_p{cfg.bench_ics, cfg.ref_iters, cfg.bench_repeats, cfg.seed};
    const auto report = bench(cm, settings, hem_p, ref_p);

    Manifest m("bench");
    m.map(cm, cfg.map)
        .add("seed", cfg.seed)
        .add("ics", cfg.bench_ics)
        .add("iterations", cfg.bench_iters)
        .add("ref_iterations", cfg.ref_iters)
        .add("repeats", cfg.bench_repeats)
        .add("ref_tol", tol);
    std::ostringstream csv;
    write_bench_csv(csv, report);
    write_file(cfg.out, m, csv.str());
    out << m.str();
    write_bench_keyvalue(out, report);
    return ok;
}

} // namespace hem::cli
