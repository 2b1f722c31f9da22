#pragma once

// Physical constants and unit conversions.
//
// Internal unit system is fixed: time in ps, energy in ueV, angular
// frequency in rad/ps, optical power in nW. Every conversion between
// energy and (angular) frequency goes through the constants below.

namespace antibunch {

// CODATA. hbar in ueV*ps, h in ueV*ns.
inline constexpr double hbar_uev_ps = 658.2119569;
inline constexpr double h_uev_ns = 4.135667696;

// Gaussian FWHM = 2*sqrt(2*ln 2) * sigma
inline constexpr double gaussian_fwhm_per_sigma = 2.3548200450309493;

inline constexpr double sigma_from_fwhm(double fwhm) {
    return fwhm / gaussian_fwhm_per_sigma;
}

inline constexpr double fwhm_from_sigma(double sigma) {
    return sigma * gaussian_fwhm_per_sigma;
}

// energy [ueV] <-> angular frequency [rad/ps]
inline constexpr double omega_from_energy_uev(double e_uev) {
    return e_uev / hbar_uev_ps;
}

inline constexpr double energy_uev_from_omega(double omega_rad_ps) {
    return omega_rad_ps * hbar_uev_ps;
}

// plain frequency [GHz] -> energy [ueV]; 1 GHz = 1e9 Hz, h nu with
// h = 4.135667696 ueV*ns gives E/ueV = 4.135667696e-3 * (nu/GHz).
inline constexpr double energy_uev_from_ghz(double nu_ghz) {
    return h_uev_ns * 1e-3 * nu_ghz;
}

inline constexpr double picoseconds_per_second = 1e12;

}  // namespace antibunch
