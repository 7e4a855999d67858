#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace coarq {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// One modulation/coding mode with the exponential packet-error fit
///   PER(g) = 1                   for g <  gamma_pl
///   PER(g) = min(1, a exp(-g*s)) for g >= gamma_pl
/// All SNRs are linear.
struct AmcMode {
    int index = 1;
    double rate = 0.0;        // bits/symbol
    double fit_a = 1.0;
    double fit_g = 1.0;
    double gamma_pl = 0.0;    // lower validity bound of the fit

    /// SNR below which the clamped fit returns 1. Never smaller than gamma_pl.
    double unit_per_edge() const;
};

double per_instantaneous(const AmcMode& mode, double gamma);

/// Ordered rate set shared by source and relay.
struct ModeSet {
    std::vector<AmcMode> modes;   // indices 1..N, strictly increasing rates
    int packet_length = 1080;     // bits
    double outage_rate = 0.0;     // R_0; zero unless the outage mode transmits

    int size() const { return static_cast<int>(modes.size()); }
    const AmcMode& mode(int n) const { return modes.at(static_cast<std::size_t>(n - 1)); }
    double rate(int n) const { return n == 0 ? outage_rate : mode(n).rate; }
    double max_rate() const;
};

struct Violation {
    std::string field;
    std::string message;
};

/// Structural checks on a mode set. Empty result means the set is usable.
std::vector<Violation> validate_mode_set(const ModeSet& ms);

}  // namespace coarq
