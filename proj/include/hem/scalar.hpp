#pragma once

#include <cmath>
#include <string>
#include <type_traits>

#include <quadmath.h>

namespace hem
{

// Setup-time extended precision: IEEE binary128, 113-bit significand (~34 decimal digits).
using quad = __float128;

// Overload set so templated kernels can be written once for double and quad.
inline double sin(double x) { return std::sin(x); }
inline double cos(double x) { return std::cos(x); }
inline double abs(double x) { return std::fabs(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double exp(double x) { return std::exp(x); }
inline double expm1(double x) { return std::expm1(x); }
inline double log(double x) { return std::log(x); }
inline double pow(double x, double y) { return std::pow(x, y); }
inline bool isfinite(double x) { return std::isfinite(x); }

inline quad sin(quad x) { return sinq(x); }
inline quad cos(quad x) { return cosq(x); }
inline quad abs(quad x) { return fabsq(x); }
inline quad sqrt(quad x) { return sqrtq(x); }
inline quad exp(quad x) { return expq(x); }
inline quad expm1(quad x) { return expm1q(x); }
inline quad log(quad x) { return logq(x); }
inline quad pow(quad x, quad y) { return powq(x, y); }
inline bool isfinite(quad x) { return finiteq(x) != 0; }

template <typename Real>
inline Real pi()
{
    if constexpr (std::is_same_v<Real, quad>) {
        return M_PIq;
    } else {
        return 3.141592653589793238462643383279502884;
    }
}

inline std::string to_string(quad x, int digits = 34)
{
    char buf[128];
    quadmath_snprintf(buf, sizeof(buf), "%.*Qg", digits, x);
    return buf;
}

} // namespace hem
