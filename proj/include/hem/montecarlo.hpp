#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <hem/analysis.hpp>
#include <hem/compiler.hpp>
#include <hem/model.hpp>

namespace hem
{

// n_pre = m / gamma with m = 10, capped at 5e7.
std::uint64_t default_n_pre(double gamma);

struct McConfig {
    double x_lo = 0;
    double x_hi = M_PI;
    double y_lo = 0;
    double y_hi = 5;
    std::uint64_t ics = 1000;
    // 0 selects default_n_pre(gamma) of the map.
    std::uint64_t n_pre = 0;
    std::uint64_t n_win = 4096;
    std::uint64_t seed = 1;
    // Worker threads for the parallel estimators; 0 uses the OpenMP default.
    int workers = 0;

    void validate() const;
    std::uint64_t effective_n_pre(const CompiledMap &cm) const;
};

std::vector<State> sample_ics(const McConfig &cfg);
// The k-th initial condition of the sample, without generating the others.
State sample_ic(const McConfig &cfg, std::uint64_t k);

enum class LabelKind { periodic, quasi_periodic, unresolved };

struct AttractorLabel {
    LabelKind kind = LabelKind::unresolved;
    Ratio resonance;
    // Mean rotation number over the classification window (x advance per 2 pi, over 2 pi).
    double rho = 0;

    // "3/2", "QP" or "Unresolved"; quasi-periodic labels aggregate regardless of rho.
    std::string name() const;
    friend bool operator==(const AttractorLabel &, const AttractorLabel &) = default;
};

struct ClassifyOptions {
    // Non-positive values select the defaults derived from the candidate set and the map.
    double tol_rho = 0;
    double tol_x = 1e-3;
    int tail = 16;
};

struct Classification {
    AttractorLabel label;
    State final_state;
    std::string diagnostic;
};

// Every p/4 in (0, hi], reduced: the superset used for soundness checks.
std::vector<Ratio> quarter_grid(double hi);

double default_tol_rho(const std::vector<Ratio> &candidates);
// Libration half-width allowance around p/q.
double libration_band(const Ratio &r, const CompiledMap &cm);

Classification classify(const CompiledMap &cm, const State &ic, const McConfig &cfg, const std::vector<Ratio> &candidates,
                        const ClassifyOptions &opts = {});

class Evaluator;

// Classification from a state already past the transient.
Classification classify_window(Evaluator &ev, const State &start, const McConfig &cfg,
                               const std::vector<Ratio> &candidates, const ClassifyOptions &opts = {});

struct ProbabilityRow {
    std::string label;
    std::uint64_t count = 0;
    double p_hat = 0;
    double ci_halfwidth = 0;
    bool reliable = false;
};

struct IcResult {
    std::uint64_t index = 0;
    State ic;
    Classification result;
};

struct ProbabilityTable {
    std::uint64_t total = 0;
    std::vector<ProbabilityRow> rows;
    std::vector<IcResult> per_ic;

    const ProbabilityRow *find(const std::string &label) const;
};

// 95% half-width, 1.96 sqrt(p (1 - p) / n).
double ci_halfwidth(double p_hat, std::uint64_t n);

ProbabilityTable tabulate(std::vector<IcResult> results);

ProbabilityTable estimate_probabilities(const CompiledMap &cm, const McConfig &cfg, const std::vector<Ratio> &candidates,
                                        const ClassifyOptions &opts = {});
// Single-threaded reference for the parallel estimator.
ProbabilityTable estimate_probabilities_serial(const CompiledMap &cm, const McConfig &cfg,
                                               const std::vector<Ratio> &candidates, const ClassifyOptions &opts = {});

struct OmegaPrimeFit {
    double omega_prime = 0;
    double delta_omega = 0;
    double a0_peaks = 0;
    double a0_troughs = 0;
    std::size_t n_peaks = 0;
    std::size_t n_troughs = 0;
    // Block means (x(2 pi i B) - x(0)) / (2 pi i B), i = 1..n/B.
    std::vector<double> block_means;
};

inline constexpr std::uint64_t default_block = 200;
inline constexpr std::size_t startup_blocks = 5;
inline constexpr std::size_t min_extrema = 8;

OmegaPrimeFit estimate_omega_prime(const CompiledMap &cm, const State &ic, std::uint64_t n,
                                   std::uint64_t block = default_block);
// Least-squares fit of a0 + a1/i + a2/i^2 + a3/i^3 to (i, v) pairs; returns a0.
double fit_inverse_cubic(const std::vector<double> &i, const std::vector<double> &v);

void write_ic_csv(std::ostream &out, const ProbabilityTable &t);
void write_probability_csv(std::ostream &out, const ProbabilityTable &t);

} // namespace hem
