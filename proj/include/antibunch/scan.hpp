#pragma once

#include <cmath>
#include <vector>

#include "antibunch/channel.hpp"
#include "antibunch/constants.hpp"
#include "antibunch/physics.hpp"

namespace antibunch {

// Laser-detuning scan over the s-shell resonance. Detuning grid and
// results are in energy units (ueV); the line positions come from the
// fine-structure doublet when present.
struct ScanResult {
    std::vector<double> delta_uev;
    std::vector<double> emitter_intensity;  // (1-eta) * emission + stray
    std::vector<double> mode_intensity;     // eta * emission
};

// Total emission rate shape at laser detuning delta [ueV]: sum over
// fine-structure components of weight * detuned_intensity(delta - offset).
inline double scan_emission(const EmitterParams& e, const DriveParams& d,
                            double delta_uev) {
    double w1 = 1.0, w2 = 0.0, off1 = 0.0, off2 = 0.0;
    if (e.fss_splitting_uev) {
        const double half = 0.5 * *e.fss_splitting_uev;
        off1 = -half;
        off2 = +half;
        w1 = w2 = 0.5;
        if (e.fss_weights) {
            const double sum = (*e.fss_weights)[0] + (*e.fss_weights)[1];
            w1 = (*e.fss_weights)[0] / sum;
            w2 = (*e.fss_weights)[1] / sum;
        }
    }
    DriveParams dd = d;
    dd.laser_detuning_rad_per_ps = omega_from_energy_uev(delta_uev - off1);
    double y = w1 * detuned_intensity(e, dd);
    if (w2 > 0) {
        dd.laser_detuning_rad_per_ps = omega_from_energy_uev(delta_uev - off2);
        y += w2 * detuned_intensity(e, dd);
    }
    return y;
}

// Gaussian smearing of a uniformly gridded trace; used only for displayed
// spectra (the spectrometer-resolution column), never for scan-derived
// linewidths which resolve via the laser step.
inline std::vector<double> smear_trace(const std::vector<double>& y, double step,
                                       double resolution_fwhm) {
    if (resolution_fwhm <= 0 || y.empty()) return y;
    const double sigma = sigma_from_fwhm(resolution_fwhm);
    const int half = std::max(1, int(std::ceil(5.0 * sigma / step)));
    std::vector<double> kernel(2 * half + 1);
    double norm = 0;
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k * step / sigma) * (k * step / sigma));
        norm += kernel[k + half];
    }
    std::vector<double> out(y.size(), 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double acc = 0;
        for (int k = -half; k <= half; ++k) {
            int j = int(i) + k;
            if (j < 0) j = 0;
            if (j >= int(y.size())) j = int(y.size()) - 1;
            acc += kernel[k + half] * y[j];
        }
        out[i] = acc / norm;
    }
    return out;
}

// Per-channel intensity traces over a monotone delta grid [ueV].
// stray_level adds a constant onto the emitter (direct) channel only.
// resolution_uev > 0 smears the displayed traces.
inline ScanResult scan_spectrum(const EmitterParams& e, const DriveParams& d,
                                const ChannelModel& ch,
                                const std::vector<double>& delta_grid_uev,
                                double stray_level = 0.0, double resolution_uev = 0.0) {
    e.validate();
    d.validate();
    ch.validate();
    if (delta_grid_uev.empty()) throw invalid_params("scan_spectrum: empty delta grid");
    for (std::size_t i = 1; i < delta_grid_uev.size(); ++i)
        if (!(delta_grid_uev[i] > delta_grid_uev[i - 1]))
            throw invalid_params("scan_spectrum: delta grid must be strictly increasing");
    if (!(resolution_uev >= 0))
        throw invalid_params("scan_spectrum: resolution must be >= 0");

    const double eta = ch.eta();
    ScanResult r;
    r.delta_uev = delta_grid_uev;
    r.emitter_intensity.reserve(delta_grid_uev.size());
    r.mode_intensity.reserve(delta_grid_uev.size());
    for (double delta : delta_grid_uev) {
        const double s = scan_emission(e, d, delta);
        r.emitter_intensity.push_back((1.0 - eta) * s + stray_level);
        r.mode_intensity.push_back(eta * s);
    }
    if (resolution_uev > 0 && delta_grid_uev.size() > 2) {
        const double step = delta_grid_uev[1] - delta_grid_uev[0];
        r.emitter_intensity = smear_trace(r.emitter_intensity, step, resolution_uev);
        r.mode_intensity = smear_trace(r.mode_intensity, step, resolution_uev);
    }
    return r;
}

}  // namespace antibunch
