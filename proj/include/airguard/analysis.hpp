#pragma once

#include <map>
#include <optional>
#include <string>

#include "airguard/rf.hpp"
#include "airguard/rules.hpp"

namespace airguard {

// Maximum attacker-victim distance at which the attacker's signal still
// reaches a victim of sensitivity sv with no guardian deployed:
// d = d0 * 10^((pa - sv - pl_d0) / (10 alpha)).
double no_guardian_range_m(double pa_dbm, double sv_dbm, const RfParams& params);

// Bound on the attack range of a power-minimizing attacker against a
// guardian strictly more sensitive than the victim (worst-case collinear
// geometry, victim between attacker and guardian):
// d_gv / (10^((sv - sg)/(10 alpha)) - 1).
// Throws DomainError when sv <= sg (the bound is unbounded).
double stealth_attack_range_m(double sv_dbm, double sg_dbm, double d_gv_m, double alpha);

// Half-open attacker-power interval [lo, hi): strong enough to reach
// the victim, still invisible to the guardian.
struct PowerWindow {
    double lo_dbm = 0.0;
    double hi_dbm = 0.0;

    double midpoint_dbm() const { return 0.5 * (lo_dbm + hi_dbm); }

    bool operator==(const PowerWindow&) const = default;
};

std::optional<PowerWindow> stealth_power_window(double d_av_m, double d_ag_m, double sv_dbm,
                                                double sg_dbm, const RfParams& params);

// Bound on the attack range of a power-maximizing attacker trying to
// out-shout the guardian's interference:
// 10^((pa - pg - gamma_eff)/(10 alpha)) * d_gv.
double force_attack_range_m(double pa_dbm, double pg_dbm, double gamma_eff_db, double d_gv_m,
                            double alpha);

// Energy the attacker spends delivering one frame over the energy the
// guardian spends destroying it, as received at the victim:
// (Pa d_av^-alpha * l * 32us) / (Pg d_gv^-alpha * t_interfere).
double energy_cost(double pa_dbm, double d_av_m, double pg_dbm, double d_gv_m, int frame_bytes,
                   double t_interfere_us, double alpha);

// Probability that a uniformly random field of `field_bits` bits lands
// within Hamming distance `tolerated_errors` of a rule literal:
// sum_{k<=t} C(n,k) / 2^n. Exact integer arithmetic internally.
double false_positive_rate(int field_bits, int tolerated_errors);

// Exact numerator of false_positive_rate (the Hamming ball size), for
// cross-checking against enumeration. n <= 64.
unsigned __int128 hamming_ball_size(int field_bits, int tolerated_errors);

// Airtime remaining after the inspected byte: (total - offset) * 32 us.
// Throws DomainError when the offset lies outside [1, total].
double max_react_time_us(int inspect_offset, int total_frame_bytes);

// Guardian pipeline timing. Defaults are the measured worst cases:
// 4 us receiver latency, 3 us interference setup, 26 us interference,
// FPGA rule checking; min_overlap_us is the in-symbol interference
// needed to corrupt it, 13 us so that a 26 us burst lands >= 13 us in
// some symbol under any alignment.
struct TimingModel {
    double rx_delay_us = 4.0;
    double t_init_us = 3.0;
    double t_interfere_us = 26.0;
    double min_overlap_us = 13.0;
    DecisionCostModel decision = DecisionCostModel::fpga_defaults();

    void validate() const; // all >= 0, min_overlap <= one symbol

    bool operator==(const TimingModel&) const = default;
};

// Every intermediate of the reaction-time feasibility check.
struct FeasibilityReport {
    int inspection_depth = 0;       // last byte the chain must observe
    double budget_us = 0.0;         // max_react_time at that depth
    double t_listen_us = 0.0;       // depth * 32 us
    double t_decide_us = 0.0;
    double t_init_us = 0.0;
    double t_interfere_us = 0.0;
    double t_react_us = 0.0;        // decide + init + interfere
    double rx_delay_us = 0.0;
    double min_overlap_us = 0.0;
    // rx_delay + t_react - (t_interfere - min_overlap): how much of the
    // post-depth budget the pipeline consumes before enough interference
    // has landed.
    double required_us = 0.0;
    bool feasible = false;
};

// A chain is feasible on a frame when at least min_overlap of
// interference lands inside it: rx_delay + t_react - (t_interfere -
// min_overlap) <= max_react_time(depth, total).
FeasibilityReport reaction_feasible(const RuleChain& chain, const Frame& layout,
                                    const TimingModel& timing, int total_frame_bytes);

// CLI-facing summary of one attack-range computation.
struct AttackRangeReport {
    enum class Binding : std::uint8_t { no_guardian, stealth, force };

    std::string scenario;
    double range_m = 0.0;
    Binding binding = Binding::no_guardian;
    std::map<std::string, double> inputs;
};

std::string to_string(AttackRangeReport::Binding b);

} // namespace airguard
