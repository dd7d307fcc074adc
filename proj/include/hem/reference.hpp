#pragma once

#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include <hem/compiler.hpp>
#include <hem/model.hpp>

namespace hem
{

enum class Precision { standard, extended };

struct RefSettings {
    int order = 25;
    double rel_tol = 1e-14;
    double abs_tol = 1e-14;
    Precision precision = Precision::standard;
    // Fraction of the estimated step actually taken.
    double safety = 0.9;

    static RefSettings standard_defaults()
    {
        return {};
    }
    static RefSettings extended_defaults()
    {
        return {25, 1e-18, 1e-18, Precision::extended, 0.9};
    }
    void validate() const;
};

inline constexpr double min_ref_step = 1e-12;

// Taylor coefficients x_0..x_order, y_0..y_order of the solution through (s, t), in double.
std::pair<std::vector<double>, std::vector<double>> ref_jet(const State &s, double t, const OrbitParams &p,
                                                            int order);

// One adaptive step, never longer than h_max. Returns the new state and the step taken.
// Throws step_failure if the estimated step falls below min_ref_step (unless h_max does).
std::pair<State, double> ref_step(const State &s, double t, const OrbitParams &p, const RefSettings &settings,
                                  double h_max = std::numeric_limits<double>::infinity());

// One step of exactly h.
State ref_step_fixed(const State &s, double t, double h, const OrbitParams &p, const RefSettings &settings);

struct RefResult {
    State state;
    int steps = 0;
};

// Integrate from t0 to t1 >= t0, landing on t1 exactly.
RefResult ref_integrate(const State &s, double t0, double t1, const OrbitParams &p, const RefSettings &settings);

struct GridPoint {
    int i = 0;
    int j = 0;
    double x0 = 0;
    double y0 = 0;
    double e_x = 0;
    double e_y = 0;
};

struct ErrorGridReport {
    int L = 0;
    double x_max = 0;
    double y_max = 0;
    double max_ex = 0;
    double max_ey = 0;
    // Index into `points` of the largest e_x and e_y.
    std::size_t argmax_ex = 0;
    std::size_t argmax_ey = 0;
    std::vector<GridPoint> points;
};

// Grid (i pi / L, j y_max / L), i, j = 0..L: one Poincare iteration against the reference over
// [0, 2 pi]. Grid points run concurrently.
ErrorGridReport error_grid(const CompiledMap &cm, int L, const RefSettings &settings);
// Same result computed on one thread.
ErrorGridReport error_grid_serial(const CompiledMap &cm, int L, const RefSettings &settings);

void write_error_grid_csv(std::ostream &out, const ErrorGridReport &r);

} // namespace hem
