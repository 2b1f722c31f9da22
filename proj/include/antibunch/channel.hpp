#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "antibunch/types.hpp"

namespace antibunch {

// Optical channel ids used throughout the pipeline.
inline constexpr std::uint8_t emitter_channel = 0;
inline constexpr std::uint8_t mode_channel = 1;

// Empirical mode-fraction curve eta(detuning): ingested as a table, looked
// up by linear interpolation (clamped at the ends). The coupling fraction
// is an input, not a predicted quantity.
struct ModeFractionTable {
    std::vector<double> detuning_uev;
    std::vector<double> eta;

    void validate() const {
        if (detuning_uev.size() != eta.size() || detuning_uev.empty())
            throw invalid_params("ModeFractionTable: need equal-length, non-empty arrays");
        for (std::size_t i = 1; i < detuning_uev.size(); ++i)
            if (!(detuning_uev[i] > detuning_uev[i - 1]))
                throw invalid_params("ModeFractionTable: detuning grid must be increasing");
        for (double v : eta)
            if (!(v >= 0 && v <= 1))
                throw invalid_params("ModeFractionTable: eta values must be in [0,1]");
    }

    double lookup(double d_uev) const {
        if (d_uev <= detuning_uev.front()) return eta.front();
        if (d_uev >= detuning_uev.back()) return eta.back();
        std::size_t hi = 1;
        while (detuning_uev[hi] < d_uev) ++hi;
        const double x0 = detuning_uev[hi - 1], x1 = detuning_uev[hi];
        const double f = (d_uev - x0) / (x1 - x0);
        return eta[hi - 1] * (1.0 - f) + eta[hi] * f;
    }
};

// Routing of emitted photons into the emitter-line vs cavity-mode channel
// plus per-channel Poisson background rates.
struct ChannelModel {
    double mode_fraction = 0.0;  // eta, used when no table is given
    std::optional<ModeFractionTable> mode_fraction_table;
    double qd_mode_detuning_uev = 0.0;  // lookup point for the table
    std::map<std::uint8_t, double> background_rate_per_ps;

    double eta() const {
        return mode_fraction_table ? mode_fraction_table->lookup(qd_mode_detuning_uev)
                                   : mode_fraction;
    }

    void validate() const {
        if (mode_fraction_table) mode_fraction_table->validate();
        const double h = eta();
        if (!(h >= 0 && h <= 1))
            throw invalid_params("ChannelModel: mode fraction must be in [0,1]");
        for (const auto& [ch, rate] : background_rate_per_ps)
            if (!(rate >= 0))
                throw invalid_params("ChannelModel: background rate must be >= 0 on channel " +
                                     std::to_string(int(ch)));
    }
};

}  // namespace antibunch
