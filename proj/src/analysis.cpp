#include "airguard/analysis.hpp"

#include <cmath>

#include "airguard/errors.hpp"

namespace airguard {

double no_guardian_range_m(double pa_dbm, double sv_dbm, const RfParams& params)
{
    params.validate();
    // received_power(d) = sv  <=>  d = d0 * 10^((pa - sv - pl_d0)/(10 alpha))
    return params.d0_m * std::pow(10.0, (pa_dbm - sv_dbm - params.pl_d0_db) /
                                            (10.0 * params.alpha));
}

double stealth_attack_range_m(double sv_dbm, double sg_dbm, double d_gv_m, double alpha)
{
    if (d_gv_m <= 0) throw DomainError("guardian-victim distance must be positive");
    if (alpha <= 0) throw DomainError("path loss exponent must be positive");
    if (sv_dbm <= sg_dbm) {
        throw DomainError("stealth bound unbounded: the guardian must be strictly more "
                          "sensitive than the victim");
    }
    return d_gv_m / (std::pow(10.0, (sv_dbm - sg_dbm) / (10.0 * alpha)) - 1.0);
}

std::optional<PowerWindow> stealth_power_window(double d_av_m, double d_ag_m, double sv_dbm,
                                                double sg_dbm, const RfParams& params)
{
    double lo = sv_dbm + path_loss_db(d_av_m, params); // reaches the victim
    double hi = sg_dbm + path_loss_db(d_ag_m, params); // still invisible to the guardian
    if (lo >= hi) return std::nullopt;                 // half-open [lo, hi)
    return PowerWindow{lo, hi};
}

double force_attack_range_m(double pa_dbm, double pg_dbm, double gamma_eff_db, double d_gv_m,
                            double alpha)
{
    if (d_gv_m <= 0) throw DomainError("guardian-victim distance must be positive");
    if (alpha <= 0) throw DomainError("path loss exponent must be positive");
    return std::pow(10.0, (pa_dbm - pg_dbm - gamma_eff_db) / (10.0 * alpha)) * d_gv_m;
}

double energy_cost(double pa_dbm, double d_av_m, double pg_dbm, double d_gv_m, int frame_bytes,
                   double t_interfere_us, double alpha)
{
    if (t_interfere_us <= 0) throw DomainError("interference duration must be positive");
    if (frame_bytes < 1) throw DomainError("frame must have at least one byte");
    if (d_av_m <= 0 || d_gv_m <= 0) throw DomainError("distances must be positive");

    double rx_attacker_mw = dbm_to_mw(pa_dbm) * std::pow(d_av_m, -alpha);
    double rx_guardian_mw = dbm_to_mw(pg_dbm) * std::pow(d_gv_m, -alpha);
    return rx_attacker_mw * frame_bytes * kUsPerByte / (rx_guardian_mw * t_interfere_us);
}

unsigned __int128 hamming_ball_size(int field_bits, int tolerated_errors)
{
    if (field_bits < 0 || field_bits > 64 || tolerated_errors < 0 ||
        tolerated_errors > field_bits) {
        throw DomainError("need 0 <= tolerated errors <= field bits <= 64");
    }
    unsigned __int128 sum = 0;
    unsigned __int128 binom = 1; // C(n, 0)
    for (int k = 0; k <= tolerated_errors; ++k) {
        sum += binom;
        binom = binom * static_cast<unsigned>(field_bits - k) / static_cast<unsigned>(k + 1);
    }
    return sum;
}

double false_positive_rate(int field_bits, int tolerated_errors)
{
    unsigned __int128 ball = hamming_ball_size(field_bits, tolerated_errors);
    return std::ldexp(static_cast<double>(ball), -field_bits);
}

double max_react_time_us(int inspect_offset, int total_frame_bytes)
{
    if (inspect_offset < 1 || inspect_offset > total_frame_bytes) {
        throw DomainError("inspection offset must lie within the frame");
    }
    return (total_frame_bytes - inspect_offset) * kUsPerByte;
}

void TimingModel::validate() const
{
    if (rx_delay_us < 0 || t_init_us < 0 || t_interfere_us < 0 || min_overlap_us < 0) {
        throw ValidationError("timing", "durations must be non-negative");
    }
    if (min_overlap_us > kSymbolUs) {
        throw ValidationError("min_overlap_us", "cannot exceed one symbol (16 us)");
    }
    decision.validate();
}

FeasibilityReport reaction_feasible(const RuleChain& chain, const Frame& layout,
                                    const TimingModel& timing, int total_frame_bytes)
{
    timing.validate();

    FeasibilityReport r;
    r.inspection_depth = chain_inspection_depth(chain, layout);
    r.budget_us = max_react_time_us(r.inspection_depth, total_frame_bytes);
    r.t_listen_us = r.inspection_depth * kUsPerByte;
    r.t_decide_us = decide_time_us(chain, timing.decision);
    r.t_init_us = timing.t_init_us;
    r.t_interfere_us = timing.t_interfere_us;
    r.t_react_us = r.t_decide_us + r.t_init_us + r.t_interfere_us;
    r.rx_delay_us = timing.rx_delay_us;
    r.min_overlap_us = timing.min_overlap_us;
    // The jam may spill past the frame end by t_interfere - min_overlap
    // and still corrupt a symbol.
    r.required_us = r.rx_delay_us + r.t_react_us - (r.t_interfere_us - r.min_overlap_us);
    r.feasible = r.required_us <= r.budget_us;
    return r;
}

std::string to_string(AttackRangeReport::Binding b)
{
    switch (b) {
    case AttackRangeReport::Binding::no_guardian: return "no_guardian";
    case AttackRangeReport::Binding::stealth: return "stealth";
    case AttackRangeReport::Binding::force: return "force";
    }
    return "?";
}

} // namespace airguard
