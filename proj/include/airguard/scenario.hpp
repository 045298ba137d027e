#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "airguard/analysis.hpp"
#include "airguard/frame.hpp"
#include "airguard/rf.hpp"
#include "airguard/rules.hpp"

namespace airguard {

enum class Role : std::uint8_t { attacker, victim, guardian };

std::string to_string(Role r);

struct NodeSpec {
    std::string id;
    Role role = Role::victim;
    double x_m = 0.0;
    double y_m = 0.0;
    double tx_power_dbm = 0.0;
    double sensitivity_dbm = -94.0;
    std::optional<std::uint16_t> addr; // short address used in frames

    // Guardian-only.
    std::optional<RuleChain> chain;
    std::optional<TimingModel> timing;
    double jam_power_dbm = 20.0;
};

enum class AttackerStrategy : std::uint8_t { fixed_power, stealthy, brute_force };

std::string to_string(AttackerStrategy s);

// What each transmitted frame of a flow looks like. dst_addr defaults to
// the destination node's short address; 0xFFFF models broadcast.
struct FrameTemplate {
    FrameType type = FrameType::data;
    int payload_len = 0;
    bool intra_pan = true;
    std::optional<std::uint16_t> dst_addr; // override
    std::optional<std::uint16_t> nw_ctrl;  // patched into payload bytes 0-1
    std::optional<std::uint8_t> asl_cmd;   // patched into payload byte 10
};

struct TrafficFlow {
    std::string id; // CSV key; defaults to "<src>-><dst>"
    std::string src;
    std::string dst;
    std::uint16_t pan = 0;
    FrameTemplate frame;
    double rate_pps = 1.0;
    double start_s = 0.0;
    double end_s = 0.0;
    AttackerStrategy strategy = AttackerStrategy::fixed_power;
};

// Timed replacement of a guardian's rule chain. While the guardian
// rewrites its chain (reconfig_latency after the scheduled time) it
// classifies nothing, which is what leaks one frame per transition.
struct RuleUpdate {
    double time_s = 0.0;
    std::string guardian;
    RuleChain chain;
};

struct Scenario {
    RfParams rf;
    std::vector<NodeSpec> nodes;
    std::vector<TrafficFlow> flows;
    std::vector<RuleUpdate> rule_updates;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    // Absent = one interval of the fastest flow.
    std::optional<double> reconfig_latency_us;
    double stats_interval_s = 1.0;
    bool carrier_sense = true;
    double min_overlap_us = 13.0; // symbol-corruption threshold at receivers

    double effective_reconfig_latency_us() const;

    // Dangling ids, duplicate ids, negative times, windows outside the
    // duration, guardians without chain/timing, flows without usable
    // addresses all throw ValidationError.
    void validate() const;
};

// JSON mirrors the types field-for-field; see README for the schema.
Scenario scenario_from_json_text(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);

} // namespace airguard
