#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "antibunch/constants.hpp"
#include "antibunch/stream.hpp"

// Start-stop (TAC/MCA-style) and all-pairs coincidence histograms with the
// cw Poisson normalization N = n_start * n_stop * dt_int * dt_MCA.

namespace antibunch {

enum class CorrelationMode { all_pairs, start_stop };

inline std::string to_string(CorrelationMode m) {
    return m == CorrelationMode::all_pairs ? "all_pairs" : "start_stop";
}

struct CorrelationRequest {
    std::uint8_t start_channel = 0;
    std::uint8_t stop_channel = 0;
    std::int64_t bin_width_ps = 0;   // dt_MCA
    std::int64_t window_ps = 0;      // tau_max
    CorrelationMode mode = CorrelationMode::all_pairs;

    void validate() const {
        if (!(bin_width_ps > 0))
            throw invalid_params("CorrelationRequest: bin_width_ps must be > 0");
        if (window_ps < 10 * bin_width_ps)
            throw invalid_params("CorrelationRequest: window_ps must be >= 10*bin_width_ps");
    }
};

// Bin b covers [b*w - w/2, b*w + w/2); ties at edges go to the upper bin.
inline std::int64_t bin_index(std::int64_t tau, std::int64_t w) {
    const std::int64_t num = 2 * tau + w, den = 2 * w;
    std::int64_t b = num / den;
    if (num % den != 0 && num < 0) --b;
    return b;
}

struct CorrelationHistogram {
    std::uint8_t start_channel = 0;
    std::uint8_t stop_channel = 0;
    std::int64_t bin_width_ps = 0;
    std::int64_t window_ps = 0;
    CorrelationMode mode = CorrelationMode::all_pairs;
    std::int64_t nbins_half = 0;  // bins run b = -nbins_half .. +nbins_half

    std::vector<std::uint64_t> raw;
    std::vector<double> normalized;  // raw / N_Poisson once normalize() ran
    std::vector<double> sigma;       // sqrt(max(raw,1)) / N_Poisson
    bool is_normalized = false;

    // acquisition metadata: counts and integration time; rates derive from
    // them unless explicitly overridden (detector-counter style)
    std::uint64_t start_counts = 0;
    std::uint64_t stop_counts = 0;
    std::int64_t integration_ps = 0;
    std::optional<double> n_start_override_cps;
    std::optional<double> n_stop_override_cps;

    std::size_t size() const { return raw.size(); }
    std::int64_t center_ps(std::size_t i) const {
        return (std::int64_t(i) - nbins_half) * bin_width_ps;
    }

    double integration_s() const {
        return double(integration_ps) / picoseconds_per_second;
    }
    double n_start_cps() const {
        return n_start_override_cps ? *n_start_override_cps
                                    : double(start_counts) / integration_s();
    }
    double n_stop_cps() const {
        return n_stop_override_cps ? *n_stop_override_cps
                                   : double(stop_counts) / integration_s();
    }
    // expected coincidences per bin for a Poisson-distributed source
    double n_poisson() const {
        return n_start_cps() * n_stop_cps() * integration_s() *
               (double(bin_width_ps) / picoseconds_per_second);
    }
};

// Correlates req.start_channel against req.stop_channel. Start events may
// be restricted to [start_lo_ps, start_hi_ps) for segmented/parallel runs:
// stop events always come from the full stream, so merging a disjoint
// cover of start ranges reproduces the single-pass histogram bit-exactly.
inline CorrelationHistogram correlate(
    const TimestampStream& stream, const CorrelationRequest& req,
    std::int64_t start_lo_ps = std::numeric_limits<std::int64_t>::min(),
    std::int64_t start_hi_ps = std::numeric_limits<std::int64_t>::max()) {
    req.validate();
    if (!stream.sorted())
        throw std::runtime_error("correlate: input stream is not time-sorted");

    const auto starts_all = stream.channel_times(req.start_channel);
    const bool same = req.start_channel == req.stop_channel;
    const auto stops = same ? starts_all : stream.channel_times(req.stop_channel);
    if (starts_all.empty())
        throw std::runtime_error("correlate: start channel " +
                                 std::to_string(int(req.start_channel)) + " has no events");
    if (stops.empty())
        throw std::runtime_error("correlate: stop channel " +
                                 std::to_string(int(req.stop_channel)) + " has no events");

    CorrelationHistogram h;
    h.start_channel = req.start_channel;
    h.stop_channel = req.stop_channel;
    h.bin_width_ps = req.bin_width_ps;
    h.window_ps = req.window_ps;
    h.mode = req.mode;
    h.nbins_half = bin_index(req.window_ps, req.bin_width_ps);
    h.raw.assign(std::size_t(2 * h.nbins_half + 1), 0);

    // duration: stream metadata when present, else the observed span
    const std::int64_t duration =
        stream.meta.duration_ps > 0
            ? stream.meta.duration_ps
            : (stream.records.empty() ? 0 : stream.records.back().t_ps + 1);
    const std::int64_t lo = std::max<std::int64_t>(start_lo_ps, 0);
    const std::int64_t hi = std::min<std::int64_t>(start_hi_ps, duration);
    h.integration_ps = std::max<std::int64_t>(hi - lo, 0);

    const auto first_start = std::lower_bound(starts_all.begin(), starts_all.end(), lo);
    const auto last_start = std::lower_bound(starts_all.begin(), starts_all.end(), hi);
    h.start_counts = std::uint64_t(last_start - first_start);
    h.stop_counts = std::uint64_t(
        std::lower_bound(stops.begin(), stops.end(), hi) -
        std::lower_bound(stops.begin(), stops.end(), lo));

    const std::int64_t sweep = (h.nbins_half + 1) * req.bin_width_ps;
    if (req.mode == CorrelationMode::all_pairs) {
        std::size_t win_lo = 0;
        for (auto it = first_start; it != last_start; ++it) {
            const std::int64_t t0 = *it;
            while (win_lo < stops.size() && stops[win_lo] < t0 - sweep) ++win_lo;
            for (std::size_t j = win_lo; j < stops.size() && stops[j] <= t0 + sweep; ++j) {
                if (same && std::size_t(it - starts_all.begin()) == j) continue;
                const std::int64_t b = bin_index(stops[j] - t0, req.bin_width_ps);
                if (b >= -h.nbins_half && b <= h.nbins_half)
                    ++h.raw[std::size_t(b + h.nbins_half)];
            }
        }
    } else {
        for (auto it = first_start; it != last_start; ++it) {
            const std::int64_t t0 = *it;
            std::size_t j;
            if (same) {
                j = std::size_t(it - starts_all.begin()) + 1;  // next event on channel
            } else {
                j = std::size_t(std::lower_bound(stops.begin(), stops.end(), t0) -
                                stops.begin());
            }
            if (j >= stops.size()) continue;
            const std::int64_t b = bin_index(stops[j] - t0, req.bin_width_ps);
            if (b >= -h.nbins_half && b <= h.nbins_half)
                ++h.raw[std::size_t(b + h.nbins_half)];
        }
    }
    return h;
}

// Divides raw counts by N_Poisson; Poisson counting errors propagate as
// sqrt(max(raw,1))/N_Poisson. Normalizing twice is an error.
inline CorrelationHistogram poisson_normalize(CorrelationHistogram h) {
    if (h.is_normalized)
        throw std::runtime_error("poisson_normalize: histogram is already normalized");
    const double np = h.n_poisson();
    if (!(np > 0))
        throw std::runtime_error(
            "poisson_normalize: needs positive rates, integration time and bin width");
    h.normalized.resize(h.raw.size());
    h.sigma.resize(h.raw.size());
    for (std::size_t i = 0; i < h.raw.size(); ++i) {
        h.normalized[i] = double(h.raw[i]) / np;
        h.sigma[i] = std::sqrt(double(std::max<std::uint64_t>(h.raw[i], 1))) / np;
    }
    h.is_normalized = true;
    return h;
}

// Bin-wise sum of two raw histograms over the same binning; counts pool
// and integration times add, so the derived rates are the pooled rates.
inline CorrelationHistogram merge(const CorrelationHistogram& a,
                                  const CorrelationHistogram& b) {
    if (a.is_normalized || b.is_normalized)
        throw std::runtime_error("merge: operands must be raw (un-normalized)");
    if (a.bin_width_ps != b.bin_width_ps || a.window_ps != b.window_ps ||
        a.nbins_half != b.nbins_half || a.mode != b.mode ||
        a.start_channel != b.start_channel || a.stop_channel != b.stop_channel)
        throw std::runtime_error("merge: binning/mode/channel mismatch");
    CorrelationHistogram out = a;
    for (std::size_t i = 0; i < out.raw.size(); ++i) out.raw[i] += b.raw[i];
    out.start_counts += b.start_counts;
    out.stop_counts += b.stop_counts;
    out.integration_ps += b.integration_ps;
    return out;
}

// Convenience: histogram with zero counts and zero integration time, the
// identity element of merge.
inline CorrelationHistogram empty_like(const CorrelationHistogram& a) {
    CorrelationHistogram out = a;
    std::fill(out.raw.begin(), out.raw.end(), 0);
    out.start_counts = 0;
    out.stop_counts = 0;
    out.integration_ps = 0;
    out.normalized.clear();
    out.sigma.clear();
    out.is_normalized = false;
    return out;
}

}  // namespace antibunch
