#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "antibunch/channel.hpp"
#include "antibunch/rng.hpp"
#include "antibunch/stream.hpp"
#include "antibunch/types.hpp"

// Monte Carlo photon stream generation. The emitter is simulated as a
// reset-renewal quantum-jump process: after every emission the system
// returns to the ground state, so the waiting-time law is the same for
// every interval. That law is tabulated once by integrating the no-jump
// conditional master equation (fixed-step RK4) and inverted per draw.
// Emission times then flow through channel routing, Poisson background,
// 50/50 HBT splitting and the detector imperfections.

namespace antibunch {

struct DetectorModel {
    double efficiency = 1.0;
    double jitter_fwhm_ps = 0.0;
    double dead_time_ps = 0.0;

    void validate() const {
        if (!(efficiency > 0 && efficiency <= 1))
            throw invalid_params("DetectorModel: efficiency must be in (0,1]");
        if (!(jitter_fwhm_ps >= 0))
            throw invalid_params("DetectorModel: jitter_fwhm_ps must be >= 0");
        if (!(dead_time_ps >= 0))
            throw invalid_params("DetectorModel: dead_time_ps must be >= 0");
    }
};

struct DetectorAssignment {
    std::uint8_t source_channel = 0;
    DetectorModel model;
};

struct SimConfig {
    EmitterParams emitter;
    DriveParams drive;
    ChannelModel channels;
    std::map<std::uint8_t, DetectorAssignment> detectors;  // output channel -> detector
    std::int64_t duration_ps = 0;
    std::uint64_t rng_seed = 0;
    double dt_ps = 1.0;

    double dt_limit() const {
        double lim = std::min(emitter.t1_ps, emitter.t2_ps);
        const double om = drive.omega();
        if (om > 0) lim = std::min(lim, 2.0 * M_PI / om);
        return lim / 50.0;
    }

    void validate() const {
        emitter.validate();
        drive.validate();
        channels.validate();
        for (const auto& [ch, det] : detectors) {
            det.model.validate();
            (void)ch;
        }
        if (!(duration_ps > 0)) throw invalid_params("SimConfig: duration_ps must be > 0");
        if (!(dt_ps > 0)) throw invalid_params("SimConfig: dt_ps must be > 0");
        if (dt_ps > dt_limit())
            throw invalid_params("SimConfig: dt_ps too coarse; needs dt <= " +
                                 std::to_string(dt_limit()) + " ps for these parameters");
    }
};

// Time segments are generated independently (emitter reset at each
// boundary, per-segment RNG sub-streams), so results do not depend on how
// segments are distributed over threads. Segment length is fixed: with
// correlations decaying over a few T1, the reset bias is ~T1/segment.
inline constexpr std::int64_t sim_segment_ps = std::int64_t(1) << 30;

// Waiting-time law of the renewal process. Integrates the no-jump
// conditional evolution from the ground state,
//   p'  =  Omega ci - p/T1        (excited population, unnormalized)
//   g'  = -Omega ci               (ground population; no recycling term)
//   cr' = -delta ci - cr/T2
//   ci' =  delta cr + (Omega/2)(g - p) - ci/T2
// where the trace n = p + g decays at the emission hazard p/(T1 n). The
// cumulative hazard Lambda(t) = -ln n(t) is stored on the RK4 grid and
// inverted with monotone cubic Hermite interpolation.
class WaitingTimeTable {
  public:
    WaitingTimeTable(const EmitterParams& e, const DriveParams& d, double dt_ps)
        : dt_(dt_ps) {
        const double t1 = e.t1_ps, t2 = e.t2_ps;
        const double om = d.omega();
        const double delta = d.laser_detuning_rad_per_ps;
        if (om <= 0) return;  // no drive: empty table, sample() never called

        struct State {
            double p, g, cr, ci;
        };
        auto deriv = [&](const State& s) {
            return State{om * s.ci - s.p / t1, -om * s.ci, -delta * s.ci - s.cr / t2,
                         delta * s.cr + 0.5 * om * (s.g - s.p) - s.ci / t2};
        };
        auto rk4 = [&](State s) {
            const State k1 = deriv(s);
            const State s2{s.p + 0.5 * dt_ * k1.p, s.g + 0.5 * dt_ * k1.g,
                           s.cr + 0.5 * dt_ * k1.cr, s.ci + 0.5 * dt_ * k1.ci};
            const State k2 = deriv(s2);
            const State s3{s.p + 0.5 * dt_ * k2.p, s.g + 0.5 * dt_ * k2.g,
                           s.cr + 0.5 * dt_ * k2.cr, s.ci + 0.5 * dt_ * k2.ci};
            const State k3 = deriv(s3);
            const State s4{s.p + dt_ * k3.p, s.g + dt_ * k3.g, s.cr + dt_ * k3.cr,
                           s.ci + dt_ * k3.ci};
            const State k4 = deriv(s4);
            s.p += dt_ / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p);
            s.g += dt_ / 6.0 * (k1.g + 2 * k2.g + 2 * k3.g + k4.g);
            s.cr += dt_ / 6.0 * (k1.cr + 2 * k2.cr + 2 * k3.cr + k4.cr);
            s.ci += dt_ / 6.0 * (k1.ci + 2 * k2.ci + 2 * k3.ci + k4.ci);
            return s;
        };

        State s{0.0, 1.0, 0.0, 0.0};
        double lambda_cum = 0.0;
        cum_hazard_.push_back(0.0);
        hazard_.push_back(0.0);
        constexpr double max_cum = 41.5;  // survival below 1e-18
        constexpr std::size_t max_nodes = 200'000'000;
        while (lambda_cum < max_cum) {
            s = rk4(s);
            const double n = s.p + s.g;
            lambda_cum += -std::log(n);
            s.p /= n;
            s.g /= n;
            s.cr /= n;
            s.ci /= n;
            cum_hazard_.push_back(lambda_cum);
            hazard_.push_back(s.p / t1);
            if (cum_hazard_.size() > max_nodes)
                throw std::runtime_error("WaitingTimeTable: survival does not decay");
        }
    }

    bool driven() const { return cum_hazard_.size() > 1; }

    // Inverts Lambda(t) = target (target ~ Exp(1)) to the waiting time.
    double sample(double target) const {
        const auto it =
            std::upper_bound(cum_hazard_.begin(), cum_hazard_.end(), target);
        if (it == cum_hazard_.end()) {
            // exponential tail continuation at the final hazard
            const double lam = hazard_.back();
            return dt_ * double(cum_hazard_.size() - 1) +
                   (target - cum_hazard_.back()) / lam;
        }
        const std::size_t hi = std::size_t(it - cum_hazard_.begin());
        if (hi == 0) return 0.0;
        const std::size_t lo = hi - 1;
        // cubic Hermite of Lambda on [lo, hi] in s in [0,1]
        const double y0 = cum_hazard_[lo], y1 = cum_hazard_[hi];
        const double m0 = hazard_[lo] * dt_, m1 = hazard_[hi] * dt_;
        auto value = [&](double x) {
            const double x2 = x * x, x3 = x2 * x;
            return (2 * x3 - 3 * x2 + 1) * y0 + (x3 - 2 * x2 + x) * m0 +
                   (-2 * x3 + 3 * x2) * y1 + (x3 - x2) * m1;
        };
        auto slope = [&](double x) {
            const double x2 = x * x;
            return (6 * x2 - 6 * x) * y0 + (3 * x2 - 4 * x + 1) * m0 +
                   (-6 * x2 + 6 * x) * y1 + (3 * x2 - 2 * x) * m1;
        };
        double a = 0.0, b = 1.0;
        double x = (y1 > y0) ? (target - y0) / (y1 - y0) : 0.5;
        for (int iter = 0; iter < 30; ++iter) {
            const double f = value(x) - target;
            if (f > 0)
                b = x;
            else
                a = x;
            const double df = slope(x);
            double next = (df > 0) ? x - f / df : 0.5 * (a + b);
            if (!(next > a && next < b)) next = 0.5 * (a + b);
            if (std::abs(next - x) < 1e-12) {
                x = next;
                break;
            }
            x = next;
        }
        return dt_ * (double(lo) + x);
    }

    double dt() const { return dt_; }
    std::size_t nodes() const { return cum_hazard_.size(); }

  private:
    double dt_;
    std::vector<double> cum_hazard_;
    std::vector<double> hazard_;
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ANTIBUNCH_THREADS")) {
        const long v = std::atol(env);
        if (v > 0) return unsigned(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Run fn(segment_index) over all segments on up to nthreads workers and
// concatenate the per-segment results in segment order.
inline std::vector<double> run_segments(
    std::int64_t duration_ps, unsigned nthreads,
    const std::function<std::vector<double>(std::size_t)>& fn) {
    const std::size_t nseg =
        std::size_t((duration_ps + sim_segment_ps - 1) / sim_segment_ps);
    std::vector<std::vector<double>> parts(nseg);
    if (nthreads <= 1 || nseg <= 1) {
        for (std::size_t k = 0; k < nseg; ++k) parts[k] = fn(k);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t k = next.fetch_add(1); k < nseg; k = next.fetch_add(1))
                parts[k] = fn(k);
        };
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < std::min<unsigned>(nthreads, unsigned(nseg)); ++i)
            pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    std::vector<double> out;
    out.reserve(total);
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

}  // namespace detail

// Ordered emission times [ps, continuous] of the driven emitter over
// [0, duration). Zero drive produces an empty stream.
inline std::vector<double> simulate_emission_times(const SimConfig& cfg,
                                                   unsigned nthreads = 1) {
    cfg.validate();
    if (cfg.drive.omega_squared() <= 0) return {};
    const WaitingTimeTable table(cfg.emitter, cfg.drive, cfg.dt_ps);

    auto gen_segment = [&](std::size_t k) {
        const double seg_start = double(std::int64_t(k) * sim_segment_ps);
        const double seg_end =
            std::min(double(cfg.duration_ps), seg_start + double(sim_segment_ps));
        RandomStream rng(cfg.rng_seed, "emission", k);
        std::vector<double> out;
        double t = seg_start;
        for (;;) {
            t += table.sample(rng.exponential(1.0));
            if (t >= seg_end) break;
            out.push_back(t);
        }
        return out;
    };
    return detail::run_segments(cfg.duration_ps, nthreads, gen_segment);
}

// Bernoulli routing into mode/emitter channels plus per-channel Poisson
// background, merged and time-sorted into an integer-ps stream.
inline TimestampStream route_and_background(const std::vector<double>& emissions,
                                            const ChannelModel& ch, const SimConfig& cfg,
                                            unsigned nthreads = 1) {
    ch.validate();
    const double eta = ch.eta();
    TimestampStream stream;
    stream.meta.duration_ps = cfg.duration_ps;
    stream.meta.seed = cfg.rng_seed;
    stream.records.reserve(emissions.size());

    RandomStream route(cfg.rng_seed, "routing");
    for (double t : emissions) {
        const std::uint8_t c = route.bernoulli(eta) ? mode_channel : emitter_channel;
        stream.records.push_back({c, std::llround(t)});
    }

    for (const auto& [bg_ch, rate] : ch.background_rate_per_ps) {
        if (rate <= 0) continue;
        auto gen_segment = [&, bg_ch = bg_ch, rate = rate](std::size_t k) {
            const double seg_start = double(std::int64_t(k) * sim_segment_ps);
            const double seg_end =
                std::min(double(cfg.duration_ps), seg_start + double(sim_segment_ps));
            RandomStream rng(cfg.rng_seed, "background",
                             (std::uint64_t(bg_ch) << 40) | k);
            std::vector<double> out;
            double t = seg_start;
            for (;;) {
                t += rng.exponential(1.0 / rate);
                if (t >= seg_end) break;
                out.push_back(t);
            }
            return out;
        };
        const auto bg = detail::run_segments(cfg.duration_ps, nthreads, gen_segment);
        for (double t : bg) stream.records.push_back({bg_ch, std::llround(t)});
    }
    stream.sort_by_time();
    return stream;
}

// Detector chain: Bernoulli(efficiency) thinning, Gaussian timing jitter
// (sampled continuously, then rounded to integer ps), and non-paralyzable
// dead time (drop events within dead_time of the previous kept event).
inline std::vector<std::int64_t> apply_detector(const std::vector<std::int64_t>& times,
                                                const DetectorModel& det,
                                                std::uint64_t seed) {
    det.validate();
    RandomStream thin(seed, "thin");
    RandomStream jitter(seed, "jitter");
    const double sigma = det.jitter_fwhm_ps / 2.3548200450309493;
    std::vector<std::int64_t> out;
    out.reserve(times.size());
    for (std::int64_t t : times) {
        if (det.efficiency < 1.0 && !thin.bernoulli(det.efficiency)) continue;
        std::int64_t td = t;
        if (sigma > 0) td = std::llround(double(t) + sigma * jitter.gaussian());
        out.push_back(td);
    }
    std::sort(out.begin(), out.end());
    if (det.dead_time_ps > 0) {
        std::vector<std::int64_t> kept;
        kept.reserve(out.size());
        for (std::int64_t t : out) {
            if (!kept.empty() && double(t - kept.back()) < det.dead_time_ps) continue;
            kept.push_back(t);
        }
        out = std::move(kept);
    }
    return out;
}

// 50/50 beam splitter followed by the two detector chains.
inline std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> hbt_split(
    const std::vector<std::int64_t>& times, const DetectorModel& det_a,
    const DetectorModel& det_b, std::uint64_t seed) {
    RandomStream splitter(seed, "split");
    std::vector<std::int64_t> to_a, to_b;
    to_a.reserve(times.size() / 2 + 16);
    to_b.reserve(times.size() / 2 + 16);
    for (std::int64_t t : times) (splitter.bernoulli(0.5) ? to_a : to_b).push_back(t);
    return {apply_detector(to_a, det_a, derive_seed(seed, "det", 0)),
            apply_detector(to_b, det_b, derive_seed(seed, "det", 1))};
}

// Full pipeline: emission, routing/background, then the configured
// detectors. Two detectors sharing a source channel form an HBT pair on
// it; a single detector observes its source directly. Without detectors
// the optical channels are returned as-is.
inline TimestampStream run_simulation(const SimConfig& cfg, unsigned nthreads = 0) {
    cfg.validate();
    const unsigned nt = detail::resolve_threads(nthreads);
    const auto emissions = simulate_emission_times(cfg, nt);
    TimestampStream optical = route_and_background(emissions, cfg.channels, cfg, nt);
    if (cfg.detectors.empty()) return optical;

    std::map<std::uint8_t, std::vector<std::uint8_t>> by_source;
    for (const auto& [out_ch, det] : cfg.detectors)
        by_source[det.source_channel].push_back(out_ch);

    TimestampStream detected;
    detected.meta = optical.meta;
    for (const auto& [source, outs] : by_source) {
        if (outs.size() > 2)
            throw invalid_params("SimConfig: more than two detectors on source channel " +
                                 std::to_string(int(source)));
        const auto times = optical.channel_times(source);
        const std::uint64_t seed = derive_seed(cfg.rng_seed, "hbt", source);
        if (outs.size() == 2) {
            const auto [a, b] = hbt_split(times, cfg.detectors.at(outs[0]).model,
                                          cfg.detectors.at(outs[1]).model, seed);
            for (std::int64_t t : a) detected.records.push_back({outs[0], t});
            for (std::int64_t t : b) detected.records.push_back({outs[1], t});
        } else {
            const auto a =
                apply_detector(times, cfg.detectors.at(outs[0]).model, seed);
            for (std::int64_t t : a) detected.records.push_back({outs[0], t});
        }
    }
    detected.sort_by_time();
    return detected;
}

}  // namespace antibunch
