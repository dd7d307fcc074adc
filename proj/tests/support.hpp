#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <hem/compiler.hpp>
#include <hem/model.hpp>
#include <hem/series.hpp>

namespace hem::test
{

inline OrbitParams mercury(double eps = 1e-3, double gamma = 1e-5)
{
    return OrbitParams{0.2056, eps, gamma};
}

inline CompiledMap build_map(const OrbitParams &p, int N, int M, bool extended = true, double T_max = 1e-18,
                             double y_max = 5)
{
    if (extended) {
        return compile(build_submaps<quad>(p, N, M), T_max, y_max);
    }
    return compile(build_submaps<double>(p, N, M), T_max, y_max);
}

// Maps are cached per process; several suites share the defaults map.
inline const CompiledMap &cached_map(const OrbitParams &p, int N, int M, bool extended = true)
{
    using key = std::tuple<double, double, double, int, int, bool>;
    static std::mutex mu;
    static std::map<key, CompiledMap> cache;
    const std::lock_guard lock(mu);
    const key k{p.e, p.eps, p.gamma, N, M, extended};
    auto it = cache.find(k);
    if (it == cache.end()) {
        it = cache.emplace(k, build_map(p, N, M, extended)).first;
    }
    return it->second;
}

inline const CompiledMap &defaults_map()
{
    return cached_map(mercury(), 18, 28);
}

inline double rel_diff(double a, double b)
{
    return std::fabs(a - b) / std::fabs(b);
}

} // namespace hem::test
