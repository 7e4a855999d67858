#include "coarq/special_functions.hpp"

#include "coarq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace coarq {

namespace {

constexpr double kSeriesLimit = 30.0;

double i0_series(double x)
{
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return sum;
}

// sqrt(2 pi x) exp(-x) I0(x) ~ sum_k ((2k-1)!!)^2 / (k! (8x)^k)
double i0_asymptotic_scaled(double x)
{
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * odd * odd / (8.0 * k * x);
        if (next > term) {
            break;
        }
        term = next;
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

// Returns exp(-x) I0(x) * sum_{k>=k0} rho^k I_k(x) / I0(x) using Miller's
// backward recurrence for the ratios I_k / I_0.
double weighted_bessel_sum(double x, double rho, int k0)
{
    const int kmax = 40 + static_cast<int>(std::ceil(std::sqrt(90.0 * x) + 0.05 * x));
    const int start = kmax + 30;
    std::vector<double> ratio(static_cast<std::size_t>(kmax) + 1);
    double above = 0.0;
    double cur = 1e-280;
    for (int k = start; k >= 1; --k) {
        const double below = above + (2.0 * k / x) * cur;
        above = cur;
        cur = below;
        if (k - 1 <= kmax) {
            ratio[static_cast<std::size_t>(k - 1)] = cur;
        }
        if (cur > 1e250) {
            above *= 1e-250;
            cur *= 1e-250;
            for (int j = k - 1; j <= kmax; ++j) {
                ratio[static_cast<std::size_t>(j)] *= 1e-250;
            }
        }
    }
    const double norm = ratio[0];
    double sum = 0.0;
    double power = 1.0;
    for (int k = 0; k <= kmax; ++k) {
        if (k >= k0) {
            const double t = power * ratio[static_cast<std::size_t>(k)] / norm;
            sum += t;
            if (t < 1e-18 * sum) {
                break;
            }
        }
        power *= rho;
        if (power == 0.0) {
            break;
        }
    }
    return bessel_i0_scaled(x) * sum;
}

void check_args(double a, double b)
{
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw DomainError("marcum_q1: arguments must be non-negative");
    }
}

}  // namespace

double bessel_i0(double x)
{
    x = std::fabs(x);
    if (x <= kSeriesLimit) {
        return i0_series(x);
    }
    return i0_asymptotic_scaled(x) * std::exp(x);
}

double bessel_i0_scaled(double x)
{
    x = std::fabs(x);
    if (x <= kSeriesLimit) {
        return i0_series(x) * std::exp(-x);
    }
    return i0_asymptotic_scaled(x);
}

double marcum_q1(double a, double b)
{
    check_args(a, b);
    if (b == 0.0) {
        return 1.0;
    }
    if (std::isinf(b)) {
        return 0.0;
    }
    if (a == 0.0) {
        return std::exp(-0.5 * b * b);
    }
    if (a < b) {
        const double d = b - a;
        const double lead = std::exp(-0.5 * d * d);
        if (lead == 0.0) {
            return 0.0;
        }
        return std::min(1.0, lead * weighted_bessel_sum(a * b, a / b, 0));
    }
    return 1.0 - marcum_q1_complement(a, b);
}

double marcum_q1_complement(double a, double b)
{
    check_args(a, b);
    if (b == 0.0) {
        return 0.0;
    }
    if (std::isinf(b)) {
        return 1.0;
    }
    if (a == 0.0) {
        return -std::expm1(-0.5 * b * b);
    }
    if (a < b) {
        return 1.0 - marcum_q1(a, b);
    }
    const double d = a - b;
    const double lead = std::exp(-0.5 * d * d);
    if (lead == 0.0) {
        return 0.0;
    }
    return std::min(1.0, lead * weighted_bessel_sum(a * b, b / a, 1));
}

double marcum_q1_difference(double a, double lo, double hi)
{
    if (!(lo <= hi)) {
        throw DomainError("marcum_q1_difference: lo must not exceed hi");
    }
    if (lo == hi) {
        return 0.0;
    }
    // Upper tail: both values small, subtract them directly.
    if (lo >= a) {
        return std::max(0.0, marcum_q1(a, lo) - marcum_q1(a, hi));
    }
    // Lower tail: both values near one, subtract the complements.
    if (hi <= a) {
        return std::max(0.0, marcum_q1_complement(a, hi) - marcum_q1_complement(a, lo));
    }
    return std::max(0.0, 1.0 - marcum_q1_complement(a, lo) - marcum_q1(a, hi));
}

}  // namespace coarq
