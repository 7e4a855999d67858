#pragma once

#include <functional>

namespace coarq {

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_panels = 4000;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature with global panel refinement.
/// `hi` may be +infinity; the tail is compactified with x = lo + t/(1-t).
/// Never throws on non-convergence; inspect `converged`.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

/// Same as integrate() but throws QuadratureError when the tolerance is missed.
double integrate_checked(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureOptions& opts = {});

}  // namespace coarq
