#include "coarq/distributions.hpp"

#include "coarq/errors.hpp"
#include "coarq/quadrature.hpp"
#include "coarq/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace coarq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The blocked-state integrals run over z = (10 log10 w - mu)/sigma from -8 to 8
// standard deviations above the integrand's peak (at least 8); the discarded
// tail mass is about 1.2e-15 of the result.
constexpr double kShadowSpan = 8.0;

const QuadratureOptions kShadowQuad{1e-11, 1e-300, 4000};

double std_normal_pdf(double z)
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Peak of exp(-c/w) phi(z) in z. A kernel decaying like exp(-c/w) moves the mass
// of the integrand to large w, possibly far into the Gaussian tail.
double shadow_peak(const RayleighLognormalLaw& law, double c)
{
    if (!(c > 0.0)) {
        return 0.0;
    }
    // d/dz: c*s*10^(-(mu + sigma z)/10) - z = 0 with s = sigma ln10 / 10; the left
    // term falls and z rises, so bisection on [0, hi] converges.
    const double s = law.sigma_db * std::numbers::ln10 / 10.0;
    auto slope = [&](double z) { return c * s * std::pow(10.0, -(law.mu_db + law.sigma_db * z) / 10.0) - z; };
    double lo = 0.0;
    double hi = 1.0;
    while (slope(hi) > 0.0 && hi < 1e6) {
        hi *= 2.0;
    }
    for (int i = 0; i < 100 && hi - lo > 1e-6; ++i) {
        const double mid = 0.5 * (lo + hi);
        (slope(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

// Integral of kernel(w) over the lognormal law of the blocked-state mean power w.
// `decay` is the coefficient c of the kernel's exp(-c/w) factor, if any.
template <typename Kernel>
double shadow_average(const RayleighLognormalLaw& law, Kernel kernel, double decay = 0.0)
{
    const double top = std::max(kShadowSpan, shadow_peak(law, decay) + kShadowSpan);
    return integrate_checked(
        [&](double z) {
            const double w = std::pow(10.0, (law.mu_db + law.sigma_db * z) / 10.0);
            return kernel(w) * std_normal_pdf(z);
        },
        -kShadowSpan, top, kShadowQuad);
}

// exp(-r*lo) - exp(-r*hi) without cancellation for narrow intervals.
double exp_difference(double r, double lo, double hi)
{
    const double head = std::exp(-r * lo);
    if (std::isinf(hi)) {
        return head;
    }
    return head * -std::expm1(-r * (hi - lo));
}

void check_interval(double lo, double hi, const char* who)
{
    if (!(lo >= 0.0) || !(lo <= hi)) {
        throw DomainError(std::string(who) + ": need 0 <= lo <= hi");
    }
}

double rician_pdf(const RicianLaw& law, double gamma)
{
    const double v = (1.0 + law.k) / law.mean;
    const double root = std::sqrt(v * gamma);
    const double sk = std::sqrt(law.k);
    const double z = 2.0 * sk * root;
    // v e^{-k} e^{-v gamma} I0(z) = v exp(-(sqrt k - sqrt(v gamma))^2) * exp(-z) I0(z)
    return v * std::exp(-(sk - root) * (sk - root)) * bessel_i0_scaled(z);
}

double rician_interval(const RicianLaw& law, double lo, double hi)
{
    const double v = (1.0 + law.k) / law.mean;
    const double bhi = std::isinf(hi) ? kInf : std::sqrt(2.0 * hi * v);
    return marcum_q1_difference(std::sqrt(2.0 * law.k), std::sqrt(2.0 * lo * v), bhi);
}

double rician_exp_weighted(const RicianLaw& law, double lo, double hi, double a, double g)
{
    const double v = (1.0 + law.k) / law.mean;
    const double vg = v + g;
    const double lead = a * v / vg * std::exp(-g * law.k / vg);
    const double bhi = std::isinf(hi) ? kInf : std::sqrt(2.0 * hi * vg);
    return lead * marcum_q1_difference(std::sqrt(2.0 * law.k * v / vg), std::sqrt(2.0 * lo * vg), bhi);
}

double rl_pdf(const RayleighLognormalLaw& law, double gamma)
{
    return shadow_average(law, [gamma](double w) { return std::exp(-gamma / w) / w; }, gamma);
}

double rl_interval(const RayleighLognormalLaw& law, double lo, double hi)
{
    if (lo == 0.0 && std::isinf(hi)) {
        return shadow_average(law, [](double) { return 1.0; });
    }
    return shadow_average(law, [lo, hi](double w) { return exp_difference(1.0 / w, lo, hi); }, lo);
}

double rl_exp_weighted(const RayleighLognormalLaw& law, double lo, double hi, double a, double g)
{
    return shadow_average(law, [=](double w) {
        return a / (g * w + 1.0) * exp_difference(g + 1.0 / w, lo, hi);
    }, lo);
}

double rl_sample(const RayleighLognormalLaw& law, PhiloxStream& rng)
{
    const double w = std::pow(10.0, (law.mu_db + law.sigma_db * rng.normal()) / 10.0);
    return w * rng.exponential();
}

double rician_sample(const RicianLaw& law, PhiloxStream& rng)
{
    const double los = std::sqrt(law.k / (law.k + 1.0));
    const double scatter = std::sqrt(0.5 / (law.k + 1.0));
    const double re = los + scatter * rng.normal();
    const double im = scatter * rng.normal();
    return law.mean * (re * re + im * im);
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

SnrDistribution SnrDistribution::exponential(double mean)
{
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw DomainError("exponential law: mean must be positive and finite");
    }
    return SnrDistribution(ExponentialLaw{mean});
}

SnrDistribution SnrDistribution::rician(double k, double mean)
{
    if (!(k >= 0.0) || !(mean > 0.0)) {
        throw DomainError("rician law: need k >= 0 and mean > 0");
    }
    return SnrDistribution(RicianLaw{k, mean});
}

SnrDistribution SnrDistribution::rayleigh_lognormal(double mu_db, double sigma_db)
{
    if (!(sigma_db > 0.0) || !std::isfinite(mu_db)) {
        throw DomainError("rayleigh-lognormal law: sigma must be positive");
    }
    return SnrDistribution(RayleighLognormalLaw{mu_db, sigma_db});
}

SnrDistribution SnrDistribution::lutz(const LutzParams& p)
{
    if (!(p.blockage_prob >= 0.0 && p.blockage_prob <= 1.0)) {
        throw DomainError("lutz law: blockage probability must lie in [0, 1]");
    }
    if (!(p.rice_factor >= 0.0) || !(p.unblocked_mean_snr > 0.0) || !(p.shadow_std_db > 0.0)) {
        throw DomainError("lutz law: need k >= 0, unblocked mean > 0, shadow std > 0");
    }
    return SnrDistribution(p);
}

SnrDistribution SnrDistribution::discrete(std::vector<Atom> atoms)
{
    if (atoms.empty()) {
        throw DomainError("discrete law: at least one atom is required");
    }
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.gamma >= 0.0) || !(a.prob >= 0.0)) {
            throw DomainError("discrete law: atoms need gamma >= 0 and prob >= 0");
        }
        total += a.prob;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw DomainError("discrete law: probabilities must sum to 1");
    }
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const Atom& x, const Atom& y) { return x.gamma < y.gamma; });
    return SnrDistribution(DiscreteLaw{std::move(atoms)});
}

LawKind SnrDistribution::kind() const
{
    return static_cast<LawKind>(law_.index());
}

double SnrDistribution::mean() const
{
    return std::visit(
        Overloaded{
            [](const ExponentialLaw& l) { return l.mean; },
            [](const RicianLaw& l) { return l.mean; },
            [](const RayleighLognormalLaw& l) {
                const double m = l.mu_db / LutzParams::xi;
                const double s = l.sigma_db / LutzParams::xi;
                return std::exp(m + 0.5 * s * s);
            },
            [](const LutzParams& p) {
                const auto b = SnrDistribution::rayleigh_lognormal(p.shadow_mean_db, p.shadow_std_db);
                return (1.0 - p.blockage_prob) * p.unblocked_mean_snr + p.blockage_prob * b.mean();
            },
            [](const DiscreteLaw& l) {
                double m = 0.0;
                for (const auto& a : l.atoms) {
                    m += a.gamma * a.prob;
                }
                return m;
            },
        },
        law_);
}

double SnrDistribution::pdf(double gamma) const
{
    if (!(gamma >= 0.0)) {
        throw DomainError("pdf: gamma must be non-negative");
    }
    return std::visit(
        Overloaded{
            [gamma](const ExponentialLaw& l) { return std::exp(-gamma / l.mean) / l.mean; },
            [gamma](const RicianLaw& l) { return rician_pdf(l, gamma); },
            [gamma](const RayleighLognormalLaw& l) { return rl_pdf(l, gamma); },
            [gamma](const LutzParams& p) {
                double d = 0.0;
                if (p.blockage_prob < 1.0) {
                    d += (1.0 - p.blockage_prob) * rician_pdf(p.unblocked(), gamma);
                }
                if (p.blockage_prob > 0.0) {
                    d += p.blockage_prob * rl_pdf(p.blocked(), gamma);
                }
                return d;
            },
            [](const DiscreteLaw&) -> double {
                throw DomainError("pdf: a discrete law has no density");
            },
        },
        law_);
}

double SnrDistribution::interval_prob(double lo, double hi) const
{
    check_interval(lo, hi, "interval_prob");
    if (lo == hi) {
        return 0.0;
    }
    return std::visit(
        Overloaded{
            [=](const ExponentialLaw& l) { return exp_difference(1.0 / l.mean, lo, hi); },
            [=](const RicianLaw& l) { return rician_interval(l, lo, hi); },
            [=](const RayleighLognormalLaw& l) { return rl_interval(l, lo, hi); },
            [=](const LutzParams& p) { return lutz_F(lo, hi, p); },
            [=](const DiscreteLaw& l) {
                double s = 0.0;
                for (const auto& a : l.atoms) {
                    if (a.gamma >= lo && a.gamma < hi) {
                        s += a.prob;
                    }
                }
                return s;
            },
        },
        law_);
}

double SnrDistribution::exp_weighted(double lo, double hi, double a, double g) const
{
    check_interval(lo, hi, "exp_weighted");
    if (lo == hi) {
        return 0.0;
    }
    return std::visit(
        Overloaded{
            [=](const ExponentialLaw& l) {
                return a / (1.0 + g * l.mean) * exp_difference(g + 1.0 / l.mean, lo, hi);
            },
            [=](const RicianLaw& l) { return rician_exp_weighted(l, lo, hi, a, g); },
            [=](const RayleighLognormalLaw& l) { return rl_exp_weighted(l, lo, hi, a, g); },
            [=](const LutzParams& p) { return lutz_G(lo, hi, p, a, g); },
            [=](const DiscreteLaw& l) {
                double s = 0.0;
                for (const auto& atom : l.atoms) {
                    if (atom.gamma >= lo && atom.gamma < hi) {
                        s += atom.prob * a * std::exp(-g * atom.gamma);
                    }
                }
                return s;
            },
        },
        law_);
}

double SnrDistribution::sample(PhiloxStream& rng) const
{
    return std::visit(
        Overloaded{
            [&](const ExponentialLaw& l) { return l.mean * rng.exponential(); },
            [&](const RicianLaw& l) { return rician_sample(l, rng); },
            [&](const RayleighLognormalLaw& l) { return rl_sample(l, rng); },
            [&](const LutzParams& p) { return sample_lutz(p, rng).gamma; },
            [&](const DiscreteLaw& l) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (const auto& a : l.atoms) {
                    acc += a.prob;
                    if (u < acc) {
                        return a.gamma;
                    }
                }
                // u landed in the rounding slack above the last partial sum.
                for (auto it = l.atoms.rbegin(); it != l.atoms.rend(); ++it) {
                    if (it->prob > 0.0) {
                        return it->gamma;
                    }
                }
                return l.atoms.back().gamma;
            },
        },
        law_);
}

double SnrDistribution::sample_above(double lo, PhiloxStream& rng) const
{
    if (lo <= 0.0) {
        return sample(rng);
    }
    if (const auto* e = std::get_if<ExponentialLaw>(&law_)) {
        return lo + e->mean * rng.exponential();
    }
    if (const auto* d = std::get_if<DiscreteLaw>(&law_)) {
        double mass = 0.0;
        for (const auto& a : d->atoms) {
            if (a.gamma >= lo) {
                mass += a.prob;
            }
        }
        if (!(mass > 0.0)) {
            throw DomainError("sample_above: no probability mass above the bound");
        }
        const double u = rng.uniform() * mass;
        double acc = 0.0;
        double last = lo;
        for (const auto& a : d->atoms) {
            if (a.gamma >= lo && a.prob > 0.0) {
                acc += a.prob;
                last = a.gamma;
                if (u < acc) {
                    return a.gamma;
                }
            }
        }
        return last;
    }
    for (int attempt = 0; attempt < 10'000'000; ++attempt) {
        const double g = sample(rng);
        if (g >= lo) {
            return g;
        }
    }
    throw NumericalError("sample_above: rejection sampling exhausted its budget");
}

double lognormal_mgf(double s, double mu_db, double sigma_db)
{
    if (!(sigma_db > 0.0)) {
        throw DomainError("lognormal_mgf: sigma must be positive");
    }
    if (s == 0.0) {
        return 1.0;
    }
    // t = 1/w with 10 log10 w ~ N(mu, sigma^2)
    return shadow_average(RayleighLognormalLaw{mu_db, sigma_db},
                          [s](double w) { return std::exp(-s / w); }, s);
}

double lutz_F(double x, double y, const LutzParams& p)
{
    check_interval(x, y, "lutz_F");
    if (x == y) {
        return 0.0;
    }
    double f = 0.0;
    if (p.blockage_prob < 1.0) {
        f += (1.0 - p.blockage_prob) * rician_interval(p.unblocked(), x, y);
    }
    if (p.blockage_prob > 0.0) {
        f += p.blockage_prob * rl_interval(p.blocked(), x, y);
    }
    return f;
}

double lutz_G(double x, double y, const LutzParams& p, double fit_a, double fit_g)
{
    check_interval(x, y, "lutz_G");
    if (!(fit_a >= 0.0) || !(fit_g >= 0.0)) {
        throw DomainError("lutz_G: fit parameters must be non-negative");
    }
    if (x == y) {
        return 0.0;
    }
    double g = 0.0;
    if (p.blockage_prob < 1.0) {
        g += (1.0 - p.blockage_prob) * rician_exp_weighted(p.unblocked(), x, y, fit_a, fit_g);
    }
    if (p.blockage_prob > 0.0) {
        g += p.blockage_prob * rl_exp_weighted(p.blocked(), x, y, fit_a, fit_g);
    }
    return g;
}

LutzDraw sample_lutz(const LutzParams& p, PhiloxStream& rng)
{
    const bool blocked = rng.uniform() < p.blockage_prob;
    if (blocked) {
        return {rl_sample(p.blocked(), rng), true};
    }
    return {rician_sample(p.unblocked(), rng), false};
}

double per_mass(const SnrDistribution& dist, const AmcMode& mode, double lo, double hi)
{
    check_interval(lo, hi, "per_mass");
    if (const auto* d = std::get_if<DiscreteLaw>(&dist.law())) {
        double s = 0.0;
        for (const auto& a : d->atoms) {
            if (a.gamma >= lo && a.gamma < hi) {
                s += a.prob * per_instantaneous(mode, a.gamma);
            }
        }
        return s;
    }
    const double edge = mode.unit_per_edge();
    double mass = 0.0;
    if (lo < edge) {
        mass += dist.interval_prob(lo, std::min(hi, edge));
    }
    const double from = std::max(lo, edge);
    if (from < hi) {
        mass += dist.exp_weighted(from, hi, mode.fit_a, mode.fit_g);
    }
    return mass;
}

double per_squared_mass(const SnrDistribution& dist, const AmcMode& mode, double lo, double hi)
{
    check_interval(lo, hi, "per_squared_mass");
    if (const auto* d = std::get_if<DiscreteLaw>(&dist.law())) {
        double s = 0.0;
        for (const auto& a : d->atoms) {
            if (a.gamma >= lo && a.gamma < hi) {
                const double per = per_instantaneous(mode, a.gamma);
                s += a.prob * per * per;
            }
        }
        return s;
    }
    const double edge = mode.unit_per_edge();
    double mass = 0.0;
    if (lo < edge) {
        mass += dist.interval_prob(lo, std::min(hi, edge));
    }
    const double from = std::max(lo, edge);
    if (from < hi) {
        mass += dist.exp_weighted(from, hi, mode.fit_a * mode.fit_a, 2.0 * mode.fit_g);
    }
    return mass;
}

}  // namespace coarq
