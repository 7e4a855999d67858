#pragma once

#include "coarq/modes.hpp"
#include "coarq/philox.hpp"

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

namespace coarq {

/// Rayleigh fading: SNR exponentially distributed.
struct ExponentialLaw {
    double mean = 1.0;
};

/// Rician fading; `k` is the linear Rice factor, `mean` the average SNR.
struct RicianLaw {
    double k = 1.0;
    double mean = 1.0;
};

/// Rayleigh fading whose mean power w is lognormal: 10 log10 w ~ N(mu_db, sigma_db^2).
struct RayleighLognormalLaw {
    double mu_db = 0.0;
    double sigma_db = 1.0;
};

/// Two-state land-mobile-satellite mixture: Rician while unblocked (probability 1-A),
/// Rayleigh/lognormal while blocked (probability A).
struct LutzParams {
    static constexpr double xi = 10.0 / std::numbers::ln10;

    double blockage_prob = 0.0;       // A
    double rice_factor = 1.0;         // k, linear
    double unblocked_mean_snr = 1.0;  // mean SNR of the unblocked state, linear
    double shadow_mean_db = 0.0;      // mu_s of the blocked-state mean power
    double shadow_std_db = 1.0;       // sigma_s

    RicianLaw unblocked() const { return {rice_factor, unblocked_mean_snr}; }
    RayleighLognormalLaw blocked() const { return {shadow_mean_db, shadow_std_db}; }
};

struct Atom {
    double gamma = 0.0;
    double prob = 0.0;
};

/// Finite-support SNR law, mostly for exact oracle checks.
struct DiscreteLaw {
    std::vector<Atom> atoms;
};

enum class LawKind { exponential, rician, rayleigh_lognormal, lutz, discrete };

struct LutzDraw {
    double gamma;
    bool blocked;
};

/// Channel SNR law. Immutable value type; all queries are const and thread-safe.
/// Sampling takes an explicit stream.
class SnrDistribution {
public:
    using Law = std::variant<ExponentialLaw, RicianLaw, RayleighLognormalLaw, LutzParams, DiscreteLaw>;

    static SnrDistribution exponential(double mean);
    static SnrDistribution rician(double k, double mean);
    static SnrDistribution rayleigh_lognormal(double mu_db, double sigma_db);
    static SnrDistribution lutz(const LutzParams& params);
    static SnrDistribution discrete(std::vector<Atom> atoms);

    LawKind kind() const;
    const Law& law() const { return law_; }
    double mean() const;

    double pdf(double gamma) const;
    /// P(lo <= gamma < hi); hi may be +infinity.
    double interval_prob(double lo, double hi) const;
    double cdf(double x) const { return interval_prob(0.0, x); }
    /// Integral of a*exp(-g*gamma)*pdf(gamma) over [lo, hi).
    double exp_weighted(double lo, double hi, double a, double g) const;

    double sample(PhiloxStream& rng) const;
    /// Draw conditioned on gamma >= lo. Requires interval_prob(lo, inf) > 0.
    double sample_above(double lo, PhiloxStream& rng) const;

private:
    explicit SnrDistribution(Law law) : law_(std::move(law)) {}

    Law law_;
};

/// E[exp(-s t)] where 10 log10 t ~ N(-mu_db, sigma_db^2), i.e. t is the reciprocal of
/// a lognormal power with dB mean mu_db.
double lognormal_mgf(double s, double mu_db, double sigma_db);

/// Lutz interval probability over [x, y): Rician part in Marcum-Q form plus the
/// blocked part as a difference of lognormal MGFs.
double lutz_F(double x, double y, const LutzParams& p);

/// Integral of a*exp(-g*gamma) * p_lutz(gamma) over [x, y).
double lutz_G(double x, double y, const LutzParams& p, double fit_a, double fit_g);

LutzDraw sample_lutz(const LutzParams& p, PhiloxStream& rng);

/// Integral of PER_n(gamma) p(gamma) over [lo, hi), honouring the unit region below
/// the mode's clamp edge.
double per_mass(const SnrDistribution& dist, const AmcMode& mode, double lo, double hi);

/// Integral of PER_n(gamma)^2 p(gamma) over [lo, hi).
double per_squared_mass(const SnrDistribution& dist, const AmcMode& mode, double lo, double hi);

}  // namespace coarq
