#include "airguard/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "airguard/errors.hpp"

namespace airguard {

using nlohmann::json;

std::string to_string(Role r)
{
    switch (r) {
    case Role::attacker: return "attacker";
    case Role::victim: return "victim";
    case Role::guardian: return "guardian";
    }
    return "?";
}

std::string to_string(AttackerStrategy s)
{
    switch (s) {
    case AttackerStrategy::fixed_power: return "fixed_power";
    case AttackerStrategy::stealthy: return "stealthy";
    case AttackerStrategy::brute_force: return "brute_force";
    }
    return "?";
}

double Scenario::effective_reconfig_latency_us() const
{
    if (reconfig_latency_us) return *reconfig_latency_us;
    // Default: one frame interval of the fastest flow.
    double max_rate = 0.0;
    for (const TrafficFlow& f : flows) max_rate = std::max(max_rate, f.rate_pps);
    return max_rate > 0 ? 1e6 / max_rate : 0.0;
}

namespace {

double node_distance(const NodeSpec& a, const NodeSpec& b)
{
    return std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
}

} // namespace

void Scenario::validate() const
{
    rf.validate();
    if (duration_s < 0) throw ValidationError("duration_s", "must be >= 0");
    if (stats_interval_s <= 0) throw ValidationError("stats_interval_s", "must be positive");
    if (min_overlap_us < 0 || min_overlap_us > kSymbolUs) {
        throw ValidationError("min_overlap_us", "must lie within one symbol (0..16 us)");
    }
    if (reconfig_latency_us && *reconfig_latency_us < 0) {
        throw ValidationError("reconfig_latency_us", "must be >= 0");
    }

    std::set<std::string> ids;
    for (const NodeSpec& n : nodes) {
        if (n.id.empty() || n.id.find_first_of(",\n\r") != std::string::npos) {
            throw ValidationError("node.id", "empty or contains CSV separators: '" + n.id + "'");
        }
        if (!ids.insert(n.id).second) {
            throw ValidationError("node.id", "duplicate node id '" + n.id + "'");
        }
        if (!std::isfinite(n.x_m) || !std::isfinite(n.y_m)) {
            throw ValidationError("node.position", "non-finite position for '" + n.id + "'");
        }
        if (n.timing) n.timing->validate();
    }

    auto find_node = [&](const std::string& id, const char* what) -> const NodeSpec& {
        for (const NodeSpec& n : nodes) {
            if (n.id == id) return n;
        }
        throw ValidationError(what, "references unknown node '" + id + "'");
    };

    std::set<std::string> flow_ids;
    for (const TrafficFlow& f : flows) {
        std::string label = "flow '" + f.id + "'";
        if (f.id.empty() || f.id.find_first_of(",\n\r") != std::string::npos) {
            throw ValidationError("flow.id", "empty or contains CSV separators");
        }
        if (!flow_ids.insert(f.id).second) {
            throw ValidationError("flow.id", "duplicate flow id '" + f.id + "'");
        }
        const NodeSpec& src = find_node(f.src, "flow.src");
        const NodeSpec& dst = find_node(f.dst, "flow.dst");
        if (f.src == f.dst) throw ValidationError("flow", label + " has src == dst");
        if (f.rate_pps <= 0) throw ValidationError("flow.rate_pps", label + ": must be positive");
        if (f.start_s < 0 || f.end_s <= f.start_s) {
            throw ValidationError("flow.window", label + ": need 0 <= start < end");
        }
        if (f.end_s > duration_s) {
            throw ValidationError("flow.window",
                                  label + ": active window ends after the scenario duration");
        }
        if (!src.addr) {
            throw ValidationError("node.addr",
                                  label + ": source node '" + f.src + "' has no short address");
        }
        if (!f.frame.dst_addr && !dst.addr) {
            throw ValidationError("node.addr", label + ": destination node '" + f.dst +
                                                   "' has no short address and the frame "
                                                   "template overrides none");
        }
        if (f.frame.payload_len < 0) {
            throw ValidationError("frame.payload_len", label + ": must be >= 0");
        }
        if (f.frame.nw_ctrl && f.frame.payload_len < kNwCtrlPayloadIndex + 2) {
            throw ValidationError("frame.payload_len",
                                  label + ": too short for the nw_ctrl probe");
        }
        if (f.frame.asl_cmd && f.frame.payload_len <= kAslCmdPayloadIndex) {
            throw ValidationError("frame.payload_len",
                                  label + ": too short for the asl_cmd probe");
        }
        int mhr = 3 + 4 + (f.frame.intra_pan ? 2 : 4);
        if (mhr + f.frame.payload_len + kFcsLen > kMaxPhyLen) {
            throw ValidationError("frame.payload_len", label + ": MPDU exceeds 127 bytes");
        }
        if (node_distance(src, dst) <= 0) {
            throw ValidationError("node.position", label + ": src and dst are co-located");
        }
        for (const NodeSpec& g : nodes) {
            if (g.role != Role::guardian) continue;
            if (node_distance(src, g) <= 0 || node_distance(g, dst) <= 0) {
                throw ValidationError("node.position", label + ": guardian '" + g.id +
                                                           "' co-located with an endpoint");
            }
        }
    }

    for (const RuleUpdate& u : rule_updates) {
        const NodeSpec& g = find_node(u.guardian, "rule_update.guardian");
        if (g.role != Role::guardian) {
            throw ValidationError("rule_update.guardian",
                                  "'" + u.guardian + "' is not a guardian");
        }
        if (u.time_s < 0 || u.time_s > duration_s) {
            throw ValidationError("rule_update.time_s", "outside the scenario duration");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON decoding

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what)
{
    throw ValidationError(where, what);
}

const json& need(const json& j, const char* key, const std::string& where)
{
    auto it = j.find(key);
    if (it == j.end()) bad(where, std::string("missing required key '") + key + "'");
    return *it;
}

double num(const json& j, const std::string& where)
{
    if (!j.is_number()) bad(where, "expected a number");
    return j.get<double>();
}

std::uint64_t uint_field(const json& j, std::uint64_t max, const std::string& where)
{
    std::uint64_t v = 0;
    if (j.is_number_unsigned()) {
        v = j.get<std::uint64_t>();
    } else if (j.is_string()) {
        const std::string s = j.get<std::string>();
        try {
            v = std::stoull(s, nullptr, 0); // accepts 0x.. and decimal
        } catch (const std::exception&) {
            bad(where, "malformed integer '" + s + "'");
        }
    } else {
        bad(where, "expected an integer or a hex string");
    }
    if (v > max) bad(where, "value out of range");
    return v;
}

RfParams rf_from_json(const json& j)
{
    RfParams p;
    if (j.contains("d0_m")) p.d0_m = num(j["d0_m"], "rf.d0_m");
    if (j.contains("alpha")) p.alpha = num(j["alpha"], "rf.alpha");
    if (j.contains("pl_d0_db")) p.pl_d0_db = num(j["pl_d0_db"], "rf.pl_d0_db");
    if (j.contains("gamma_sir_db")) p.gamma_sir_db = num(j["gamma_sir_db"], "rf.gamma_sir_db");
    if (j.contains("waveform_gain_db")) {
        p.waveform_gain_db = num(j["waveform_gain_db"], "rf.waveform_gain_db");
    }
    if (j.contains("shadowing_sigma_db")) {
        p.shadowing_sigma_db = num(j["shadowing_sigma_db"], "rf.shadowing_sigma_db");
    }
    return p;
}

DecisionCostModel decision_from_json(const json& j)
{
    DecisionCostModel m;
    std::string variant = need(j, "variant", "timing.decision").get<std::string>();
    if (variant == "firmware") m.variant = DecisionCostModel::Variant::firmware;
    else if (variant == "fpga") m.variant = DecisionCostModel::Variant::fpga;
    else bad("timing.decision.variant", "expected 'firmware' or 'fpga'");
    if (j.contains("c_base_us")) m.c_base_us = num(j["c_base_us"], "decision.c_base_us");
    if (j.contains("c_rule_us")) m.c_rule_us = num(j["c_rule_us"], "decision.c_rule_us");
    if (j.contains("c_dispatch_us")) {
        m.c_dispatch_us = num(j["c_dispatch_us"], "decision.c_dispatch_us");
    }
    if (j.contains("c_exec_us")) m.c_exec_us = num(j["c_exec_us"], "decision.c_exec_us");
    if (j.contains("fpga_const_us")) {
        m.fpga_const_us = num(j["fpga_const_us"], "decision.fpga_const_us");
    }
    return m;
}

TimingModel timing_from_json(const json& j)
{
    TimingModel t;
    if (j.contains("rx_delay_us")) t.rx_delay_us = num(j["rx_delay_us"], "timing.rx_delay_us");
    if (j.contains("t_init_us")) t.t_init_us = num(j["t_init_us"], "timing.t_init_us");
    if (j.contains("t_interfere_us")) {
        t.t_interfere_us = num(j["t_interfere_us"], "timing.t_interfere_us");
    }
    if (j.contains("min_overlap_us")) {
        t.min_overlap_us = num(j["min_overlap_us"], "timing.min_overlap_us");
    }
    if (j.contains("decision")) t.decision = decision_from_json(j["decision"]);
    return t;
}

RuleChain chain_from_json(const json& j, const std::filesystem::path& base_dir,
                          const std::string& where)
{
    if (j.contains("rules_file")) {
        std::filesystem::path p = j["rules_file"].get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return load_rules_file(p);
    }
    if (!j.contains("rules")) bad(where, "needs 'rules' (array of gtables lines) or 'rules_file'");
    const json& arr = j["rules"];
    if (!arr.is_array()) bad(where + ".rules", "expected an array of gtables lines");
    RuleChain chain;
    for (const json& line : arr) {
        chain.rules.push_back(parse_rule_line(line.get<std::string>()));
    }
    return chain;
}

NodeSpec node_from_json(const json& j, const std::filesystem::path& base_dir)
{
    NodeSpec n;
    n.id = need(j, "id", "node").get<std::string>();
    std::string where = "node '" + n.id + "'";

    std::string role = need(j, "role", where).get<std::string>();
    if (role == "attacker") n.role = Role::attacker;
    else if (role == "victim") n.role = Role::victim;
    else if (role == "guardian") n.role = Role::guardian;
    else bad(where + ".role", "expected attacker/victim/guardian");

    const json& pos = need(j, "position", where);
    if (!pos.is_array() || pos.size() != 2) bad(where + ".position", "expected [x, y]");
    n.x_m = num(pos[0], where + ".position");
    n.y_m = num(pos[1], where + ".position");

    if (j.contains("tx_power_dbm")) n.tx_power_dbm = num(j["tx_power_dbm"], where);
    if (j.contains("sensitivity_dbm")) n.sensitivity_dbm = num(j["sensitivity_dbm"], where);
    if (j.contains("addr")) {
        n.addr = static_cast<std::uint16_t>(uint_field(j["addr"], 0xFFFF, where + ".addr"));
    }

    bool has_guardian_keys =
        j.contains("rules") || j.contains("rules_file") || j.contains("timing") ||
        j.contains("jam_power_dbm");
    if (n.role != Role::guardian && has_guardian_keys) {
        bad(where, "rules/timing/jam_power_dbm are only valid for guardians");
    }
    if (n.role == Role::guardian) {
        n.chain = (j.contains("rules") || j.contains("rules_file"))
                      ? chain_from_json(j, base_dir, where)
                      : RuleChain{};
        n.timing = j.contains("timing") ? timing_from_json(j["timing"]) : TimingModel{};
        if (j.contains("jam_power_dbm")) n.jam_power_dbm = num(j["jam_power_dbm"], where);
    }
    return n;
}

TrafficFlow flow_from_json(const json& j, std::size_t index)
{
    TrafficFlow f;
    f.src = need(j, "src", "flow").get<std::string>();
    f.dst = need(j, "dst", "flow").get<std::string>();
    f.id = j.contains("id") ? j["id"].get<std::string>() : f.src + "->" + f.dst;
    std::string where = "flow '" + f.id + "'";

    f.pan = static_cast<std::uint16_t>(uint_field(need(j, "pan", where), 0xFFFF, where + ".pan"));
    f.rate_pps = num(need(j, "rate_pps", where), where + ".rate_pps");
    f.start_s = num(need(j, "start_s", where), where + ".start_s");
    f.end_s = num(need(j, "end_s", where), where + ".end_s");

    if (j.contains("strategy")) {
        std::string s = j["strategy"].get<std::string>();
        if (s == "fixed_power") f.strategy = AttackerStrategy::fixed_power;
        else if (s == "stealthy") f.strategy = AttackerStrategy::stealthy;
        else if (s == "brute_force") f.strategy = AttackerStrategy::brute_force;
        else bad(where + ".strategy", "expected fixed_power/stealthy/brute_force");
    }

    if (j.contains("frame")) {
        const json& t = j["frame"];
        if (t.contains("type")) f.frame.type = frame_type_from_string(t["type"].get<std::string>());
        if (t.contains("payload_len")) {
            f.frame.payload_len = static_cast<int>(num(t["payload_len"], where));
        }
        if (t.contains("intra_pan")) f.frame.intra_pan = t["intra_pan"].get<bool>();
        if (t.contains("dst_addr")) {
            f.frame.dst_addr =
                static_cast<std::uint16_t>(uint_field(t["dst_addr"], 0xFFFF, where));
        }
        if (t.contains("nw_ctrl")) {
            f.frame.nw_ctrl = static_cast<std::uint16_t>(uint_field(t["nw_ctrl"], 0xFFFF, where));
        }
        if (t.contains("asl_cmd")) {
            f.frame.asl_cmd = static_cast<std::uint8_t>(uint_field(t["asl_cmd"], 0xFF, where));
        }
    }
    (void)index;
    return f;
}

Scenario from_json(const json& j, const std::filesystem::path& base_dir)
{
    if (!j.is_object()) throw ValidationError("scenario", "top level must be a JSON object");
    Scenario s;
    if (j.contains("rf")) s.rf = rf_from_json(j["rf"]);
    s.duration_s = num(need(j, "duration_s", "scenario"), "scenario.duration_s");
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("reconfig_latency_us")) {
        s.reconfig_latency_us = num(j["reconfig_latency_us"], "scenario.reconfig_latency_us");
    }
    if (j.contains("stats_interval_s")) {
        s.stats_interval_s = num(j["stats_interval_s"], "scenario.stats_interval_s");
    }
    if (j.contains("carrier_sense")) s.carrier_sense = j["carrier_sense"].get<bool>();
    if (j.contains("min_overlap_us")) {
        s.min_overlap_us = num(j["min_overlap_us"], "scenario.min_overlap_us");
    }

    for (const json& nj : j.value("nodes", json::array())) {
        s.nodes.push_back(node_from_json(nj, base_dir));
    }
    std::size_t idx = 0;
    for (const json& fj : j.value("flows", json::array())) {
        s.flows.push_back(flow_from_json(fj, idx++));
    }
    for (const json& uj : j.value("rule_updates", json::array())) {
        RuleUpdate u;
        u.time_s = num(need(uj, "time_s", "rule_update"), "rule_update.time_s");
        u.guardian = need(uj, "guardian", "rule_update").get<std::string>();
        u.chain = chain_from_json(uj, base_dir, "rule_update");
        s.rule_updates.push_back(std::move(u));
    }

    s.validate();
    return s;
}

} // namespace

Scenario scenario_from_json_text(std::string_view text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what(), e.byte);
    }
    return from_json(j, std::filesystem::current_path());
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open scenario file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError("scenario JSON in '" + path.string() + "': " + e.what(), e.byte);
    }
    return from_json(j, path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::current_path());
}

} // namespace airguard
