#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airguard/scenario.hpp"

namespace airguard {

// One burst of guardian interference, in the simulation's absolute
// microsecond clock.
struct JamAction {
    double start_us = 0.0;
    double duration_us = 0.0;
    double power_dbm = 0.0; // radiated
    std::string guardian_id;
};

// A jam as seen by a receiver.
struct JamAtReceiver {
    double start_us = 0.0;
    double duration_us = 0.0;
    double rx_power_dbm = 0.0;
};

enum class Outcome : std::uint8_t { received, destroyed, below_sensitivity };

std::string to_string(Outcome o);

// Victim-side reception arithmetic: below sensitivity, else destroyed iff
// some 16 us symbol sees summed jam power pushing SIR below gamma_eff for
// at least min_overlap_us, else received. Concurrent jams add linearly.
Outcome reception_outcome(double frame_start_us, int total_frame_bytes, double rx_power_dbm,
                          double sensitivity_dbm, std::span<const JamAtReceiver> jams,
                          double gamma_eff_db, double min_overlap_us);

// Listen -> decide -> init -> interfere for one detected frame. The
// caller has already established detection (Condition 1) and supplies the
// received power the RSS matches see. Returns nothing on ACCEPT; an
// infeasibly late verdict still returns its JamAction and the destruction
// arithmetic decides. Uses the guardian's own chain and timing.
std::optional<JamAction> guardian_pipeline(const Frame& frame, const NodeSpec& guardian,
                                           double rx_power_dbm, double frame_start_us);

// Per-interval, per-flow counters. false_neg counts frames the scheduled
// policy marked for destruction that were received anyway; false_pos
// counts destroyed frames the scheduled policy did not mark.
struct StatsRow {
    double interval_start_s = 0.0;
    std::string flow_id;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t destroyed = 0;
    std::uint64_t below_sensitivity = 0;
    std::uint64_t false_pos = 0;
    std::uint64_t false_neg = 0;
    double jam_airtime_us = 0.0;

    bool operator==(const StatsRow&) const = default;
};

struct FlowTotals {
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
    std::uint64_t destroyed = 0;
    std::uint64_t below_sensitivity = 0;
    std::uint64_t false_pos = 0;
    std::uint64_t false_neg = 0;

    bool operator==(const FlowTotals&) const = default;
};

struct GuardianTotals {
    std::uint64_t jams = 0;
    double jam_airtime_us = 0.0;

    bool operator==(const GuardianTotals&) const = default;
};

struct StatsReport {
    std::vector<StatsRow> rows; // (interval, flow) with sent > 0, in time order
    std::map<std::string, FlowTotals> flow_totals;
    std::map<std::string, GuardianTotals> guardian_totals;
    double duration_s = 0.0;
    std::uint64_t seed = 0;

    std::string to_csv() const;     // header always present
    std::string to_json() const;    // summary document

    bool operator==(const StatsReport&) const = default;
};

// Deterministic discrete-event run: identical scenario (seed included)
// gives a byte-identical report.
StatsReport run(const Scenario& scenario);

} // namespace airguard
