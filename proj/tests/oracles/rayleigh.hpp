#pragma once

// Conditional PER averages on a Rayleigh link by direct quadrature.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

struct FitMode {
    double a;
    double g;
    double gamma_pl;
};

inline double fit_per(const FitMode& m, double x)
{
    return x < m.gamma_pl ? 1.0 : std::min(1.0, m.a * std::exp(-m.g * x));
}

/// Mean of PER^power over [lo, hi) under an exponential law with the given mean.
inline double rayleigh_avg(const FitMode& m, double mean, double lo, double hi, int power = 1)
{
    auto f = [&](double x) { return std::pow(fit_per(m, x), power) * std::exp(-x / mean) / mean; };
    const double edge = std::max(m.gamma_pl, m.a > 1.0 ? std::log(m.a) / m.g : 0.0);
    double mass = 0.0;
    double a = lo;
    for (double cut : {edge, hi}) {
        const double b = std::min(cut, hi);
        if (b > a) {
            mass += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
            a = b;
        }
    }
    const double upper = std::isinf(hi) ? 0.0 : std::exp(-hi / mean);
    const double prob = std::exp(-lo / mean) - upper;
    return mass / prob;
}

}  // namespace oracle
