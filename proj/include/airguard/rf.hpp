#pragma once

#include <cstdint>
#include <string_view>

namespace airguard {

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// Log-distance path loss plus the receiver-side destruction threshold.
// Defaults are the 2.4 GHz indoor parameters the analysis examples use:
// d0 = 8 m, alpha = 3.3, 58.5 dB at d0; gamma_sir 3 dB for white-noise
// interference plus a 4 dB waveform effectiveness offset (midpoint of
// the 3-5 dB a continuous wave buys).
struct RfParams {
    double d0_m = 8.0;
    double alpha = 3.3;
    double pl_d0_db = 58.5;
    double gamma_sir_db = 3.0;
    double waveform_gain_db = 4.0;
    double shadowing_sigma_db = 0.0; // 0 = deterministic channel

    double gamma_eff_db() const { return gamma_sir_db + waveform_gain_db; }

    void validate() const;
};

// pl_d0 + 10*alpha*log10(d/d0). Deterministic; shadowing is a separate,
// seeded per-link term (shadowing_db) the simulator adds itself.
// Throws DomainError for d <= 0.
double path_loss_db(double d_m, const RfParams& params);

double received_power_dbm(double ptx_dbm, double d_m, const RfParams& params);

// Condition for a receiver at distance d to pick the signal up at all.
// Inclusive: received power equal to the sensitivity still detects.
bool detects(double ptx_dbm, double d_m, double sensitivity_dbm, const RfParams& params);

// Condition for guardian interference to corrupt the frame at the
// victim: SIR strictly below the effective threshold
// gamma_sir + waveform_gain.
bool destroys(double pa_dbm, double d_av_m, double pg_dbm, double d_gv_m,
              const RfParams& params);

// S = N_T * N_F * SNR_min in linear form, a plain sum in dB. The
// theoretical 802.15.4 floor sums to -112.2 dBm; bit-error tolerance
// enters as a negative contribution to snr_min_db.
struct SensitivityBudget {
    double thermal_noise_dbm = 0.0;
    double noise_figure_db = 0.0;
    double snr_min_db = 0.0;

    void validate() const; // noise_figure_db >= 0
};

double sensitivity_dbm(const SensitivityBudget& budget);

// Frozen-per-scenario (block fading) log-normal shadowing draw for the
// link between two named nodes. Symmetric in the node names and fully
// determined by (seed, link, sigma).
double shadowing_db(std::uint64_t seed, std::string_view node_a, std::string_view node_b,
                    double sigma_db);

} // namespace airguard
