#pragma once

namespace coarq {

/// Modified Bessel function of the first kind, order zero. Overflows past x ~ 713.
double bessel_i0(double x);

/// exp(-x) * I0(x), finite for every x >= 0.
double bessel_i0_scaled(double x);

/// First-order Marcum Q function Q1(a, b).
double marcum_q1(double a, double b);

/// 1 - Q1(a, b), accurate when Q1 is close to one.
double marcum_q1_complement(double a, double b);

/// Q1(a, lo) - Q1(a, hi) for lo <= hi, without cancellation on either tail.
/// hi may be +infinity.
double marcum_q1_difference(double a, double lo, double hi);

}  // namespace coarq
