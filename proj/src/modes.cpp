#include "coarq/modes.hpp"

#include <algorithm>
#include <cmath>

namespace coarq {

double AmcMode::unit_per_edge() const
{
    // a*exp(-g*x) >= 1 for x <= ln(a)/g, so the clamp extends the unit region.
    if (fit_a > 1.0 && fit_g > 0.0) {
        return std::max(gamma_pl, std::log(fit_a) / fit_g);
    }
    return gamma_pl;
}

double per_instantaneous(const AmcMode& mode, double gamma)
{
    if (gamma < mode.gamma_pl) {
        return 1.0;
    }
    return std::min(1.0, mode.fit_a * std::exp(-mode.fit_g * gamma));
}

double ModeSet::max_rate() const
{
    double r = outage_rate;
    for (const auto& m : modes) {
        r = std::max(r, m.rate);
    }
    return r;
}

std::vector<Violation> validate_mode_set(const ModeSet& ms)
{
    std::vector<Violation> out;
    if (ms.modes.empty()) {
        out.push_back({"modes", "at least one mode is required"});
    }
    if (ms.packet_length <= 0) {
        out.push_back({"packet_length", "packet length must be positive"});
    }
    if (!(ms.outage_rate >= 0.0)) {
        out.push_back({"outage_rate", "outage rate must be non-negative"});
    }
    for (std::size_t i = 0; i < ms.modes.size(); ++i) {
        const auto& m = ms.modes[i];
        const std::string where = "modes[" + std::to_string(i) + "]";
        if (m.index != static_cast<int>(i) + 1) {
            out.push_back({where + ".index", "mode indices must run 1..N in order"});
        }
        if (!(m.rate > 0.0)) {
            out.push_back({where + ".rate", "rate must be positive"});
        }
        if (!(m.fit_a > 0.0)) {
            out.push_back({where + ".a", "fit parameter a must be positive"});
        }
        if (!(m.fit_g > 0.0)) {
            out.push_back({where + ".g", "fit parameter g must be positive"});
        }
        if (!(m.gamma_pl >= 0.0)) {
            out.push_back({where + ".gamma", "lower fit bound must be non-negative"});
        }
        if (i > 0 && !(m.rate > ms.modes[i - 1].rate)) {
            out.push_back({where + ".rate", "non-increasing rates"});
        }
        // PER <= 1 at gamma_pl holds for every mode through the clamp.
    }
    return out;
}

}  // namespace coarq
