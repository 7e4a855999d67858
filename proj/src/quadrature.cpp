#include "coarq/quadrature.hpp"

#include "coarq/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace coarq {

namespace {

// Kronrod abscissae; odd positions (1, 3, 5, 7) are the Gauss points.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double abs_value;

    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gauss_kronrod(const std::function<double(double)>& g, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = g(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    double abs_sum = std::fabs(kronrod);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[static_cast<std::size_t>(j)];
        const double f1 = g(center - dx);
        const double f2 = g(center + dx);
        kronrod += kWgk[static_cast<std::size_t>(j)] * (f1 + f2);
        abs_sum += kWgk[static_cast<std::size_t>(j)] * (std::fabs(f1) + std::fabs(f2));
        if (j % 2 == 1) {
            gauss += kWg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
        }
    }
    return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half), abs_sum * std::fabs(half)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts)
{
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw DomainError("integrate: invalid interval");
    }
    if (lo == hi) {
        return {0.0, 0.0, 0, true};
    }
    if (std::isinf(lo)) {
        throw DomainError("integrate: lower limit must be finite");
    }

    std::function<double(double)> g;
    double a = lo;
    double b = hi;
    if (std::isinf(hi)) {
        g = [&f, lo](double t) {
            const double s = 1.0 - t;
            return f(lo + t / s) / (s * s);
        };
        a = 0.0;
        b = 1.0;
    } else {
        g = f;
    }

    std::priority_queue<Panel> heap;
    Panel first = gauss_kronrod(g, a, b);
    double total = first.value;
    double total_err = first.error;
    double total_abs = first.abs_value;
    heap.push(first);
    int panels = 1;

    const double eps = std::numeric_limits<double>::epsilon();
    auto target = [&] { return std::max(opts.rel_tol * std::fabs(total), opts.abs_tol); };

    while (total_err > target() && panels < opts.max_panels) {
        // Error indistinguishable from accumulated rounding: further splitting is noise.
        if (total_err <= 50.0 * eps * total_abs) {
            break;
        }
        Panel worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            break;
        }
        heap.pop();
        const Panel left = gauss_kronrod(g, worst.a, mid);
        const Panel right = gauss_kronrod(g, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        ++panels;
    }

    // Re-sum from the panels to shed the drift of the running totals.
    double value = 0.0;
    double err = 0.0;
    double abs_value = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        err += heap.top().error;
        abs_value += heap.top().abs_value;
        heap.pop();
    }
    const bool ok = err <= std::max(opts.rel_tol * std::fabs(value), opts.abs_tol)
        || err <= 50.0 * eps * abs_value;
    return {value, err, panels, ok && std::isfinite(value)};
}

double integrate_checked(const std::function<double(double)>& f, double lo, double hi,
                         const QuadratureOptions& opts)
{
    const QuadratureResult r = integrate(f, lo, hi, opts);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "quadrature did not converge on [" << lo << ", " << hi << "]: value " << r.value
            << ", error estimate " << r.error << " after " << r.panels << " panels";
        throw QuadratureError(msg.str(), r.value, r.error);
    }
    return r.value;
}

}  // namespace coarq
