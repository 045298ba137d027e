#include "airguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "json.hpp"

#include "airguard/errors.hpp"
#include "airguard/rf.hpp"

namespace airguard {

std::string to_string(Outcome o)
{
    switch (o) {
    case Outcome::received: return "received";
    case Outcome::destroyed: return "destroyed";
    case Outcome::below_sensitivity: return "below_sensitivity";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Reception arithmetic

Outcome reception_outcome(double frame_start_us, int total_frame_bytes, double rx_power_dbm,
                          double sensitivity_dbm, std::span<const JamAtReceiver> jams,
                          double gamma_eff_db, double min_overlap_us)
{
    if (rx_power_dbm < sensitivity_dbm) return Outcome::below_sensitivity;

    const double rx_mw = dbm_to_mw(rx_power_dbm);
    const double gamma_lin = dbm_to_mw(gamma_eff_db); // dB ratio to linear
    const int n_symbols = total_frame_bytes * 2;

    // A symbol is corrupted when the summed jam power keeps the SIR
    // strictly below gamma_eff for at least min_overlap within it.
    for (int s = 0; s < n_symbols; ++s) {
        const double sym_begin = frame_start_us + s * kSymbolUs;
        const double sym_end = sym_begin + kSymbolUs;

        // Segment boundaries from the jams clipped to this symbol.
        std::vector<double> cuts;
        for (const JamAtReceiver& j : jams) {
            double a = std::max(j.start_us, sym_begin);
            double b = std::min(j.start_us + j.duration_us, sym_end);
            if (a < b) {
                cuts.push_back(a);
                cuts.push_back(b);
            }
        }
        if (cuts.empty()) continue;
        std::sort(cuts.begin(), cuts.end());

        double corrupted_us = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double a = cuts[i], b = cuts[i + 1];
            if (a >= b) continue;
            double mid = 0.5 * (a + b);
            double jam_mw = 0.0;
            for (const JamAtReceiver& j : jams) {
                if (j.start_us <= mid && mid < j.start_us + j.duration_us) {
                    jam_mw += dbm_to_mw(j.rx_power_dbm);
                }
            }
            if (jam_mw > 0 && rx_mw / jam_mw < gamma_lin) corrupted_us += b - a;
        }
        if (corrupted_us >= min_overlap_us - 1e-9) return Outcome::destroyed;
    }
    return Outcome::received;
}

// ---------------------------------------------------------------------------
// Guardian pipeline

namespace {

// Like chain_inspection_depth but fields the frame lacks are skipped:
// their matches can never fire on this frame, and the guardian cannot
// wait for bytes that never arrive.
int lenient_depth(const RuleChain& chain, const Frame& frame)
{
    int depth = field_offset(frame, FieldRef::of(FieldRef::Kind::fcf));
    for (const Rule& rule : chain.rules) {
        for (const Match& m : rule.matches) {
            for (FieldRef f : m.fields()) {
                if (f.kind == FieldRef::Kind::src_pan && frame.intra_pan() && !frame.src_pan) {
                    f = FieldRef::of(FieldRef::Kind::dst_pan);
                }
                try {
                    depth = std::max(depth, field_offset(frame, f));
                } catch (const ValidationError&) {
                    // absent from this layout
                }
            }
        }
    }
    return depth;
}

struct PipelineResult {
    double classify_at_us = 0.0;
    EvalResult eval;
    double t_decide_us = 0.0;
};

PipelineResult run_pipeline(const RuleChain& chain, const TimingModel& timing,
                            const Frame& frame, double rx_power_dbm, double frame_start_us)
{
    Frame observed = frame;
    observed.rss_dbm = rx_power_dbm;

    PipelineResult r;
    int depth = lenient_depth(chain, observed);
    r.classify_at_us = frame_start_us + depth * kUsPerByte + timing.rx_delay_us;
    r.eval = evaluate_chain(chain, observed);
    r.t_decide_us = decide_time_us(chain, timing.decision);
    return r;
}

} // namespace

std::optional<JamAction> guardian_pipeline(const Frame& frame, const NodeSpec& guardian,
                                           double rx_power_dbm, double frame_start_us)
{
    const RuleChain chain = guardian.chain.value_or(RuleChain{});
    const TimingModel timing = guardian.timing.value_or(TimingModel{});

    PipelineResult r = run_pipeline(chain, timing, frame, rx_power_dbm, frame_start_us);
    if (r.eval.verdict != Verdict::DROP) return std::nullopt;

    JamAction jam;
    jam.start_us = r.classify_at_us + r.t_decide_us + timing.t_init_us;
    jam.duration_us = timing.t_interfere_us;
    jam.power_dbm = guardian.jam_power_dbm;
    jam.guardian_id = guardian.id;
    return jam;
}

// ---------------------------------------------------------------------------
// Scenario execution

namespace {

struct GuardianState {
    const NodeSpec* node = nullptr;

    // Enforcement timeline. A phase without a chain is the reconfig gap:
    // the checker is being rewritten and classifies nothing.
    struct Phase {
        double from_us;
        std::optional<RuleChain> chain;
    };
    std::vector<Phase> phases;

    // Scheduled policy, used for false positive/negative accounting:
    // updates count from their scheduled instant, without the gap.
    struct IntentPhase {
        double from_us;
        RuleChain chain;
    };
    std::vector<IntentPhase> intent;

    const Phase& phase_at(double t_us) const
    {
        std::size_t best = 0;
        for (std::size_t i = 0; i < phases.size(); ++i) {
            if (phases[i].from_us <= t_us) best = i;
        }
        return phases[best];
    }

    const RuleChain& intent_at(double t_us) const
    {
        std::size_t best = 0;
        for (std::size_t i = 0; i < intent.size(); ++i) {
            if (intent[i].from_us <= t_us) best = i;
        }
        return intent[best].chain;
    }
};

struct SimFrame {
    double nominal_us = 0.0;
    double start_us = 0.0;
    std::size_t flow_idx = 0;
    std::uint64_t k = 0;
    double ptx_dbm = 0.0;
};

Frame build_frame(const TrafficFlow& flow, const NodeSpec& src, const NodeSpec& dst,
                  std::uint64_t k)
{
    Frame f;
    f.fcf = make_fcf(flow.frame.type, AddrMode::short16, AddrMode::short16,
                     flow.frame.intra_pan);
    f.seq = static_cast<std::uint8_t>(k & 0xFF);
    f.dst_pan = flow.pan;
    f.dst_addr = flow.frame.dst_addr ? *flow.frame.dst_addr : *dst.addr;
    if (!flow.frame.intra_pan) f.src_pan = flow.pan;
    f.src_addr = *src.addr;
    f.payload.assign(static_cast<std::size_t>(flow.frame.payload_len), 0x00);
    if (flow.frame.nw_ctrl) {
        f.payload[kNwCtrlPayloadIndex] = static_cast<std::uint8_t>(*flow.frame.nw_ctrl & 0xFF);
        f.payload[kNwCtrlPayloadIndex + 1] = static_cast<std::uint8_t>(*flow.frame.nw_ctrl >> 8);
    }
    if (flow.frame.asl_cmd) f.payload[kAslCmdPayloadIndex] = *flow.frame.asl_cmd;
    return f;
}

std::string format_interval(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

StatsReport run(const Scenario& scenario)
{
    scenario.validate();

    std::unordered_map<std::string, const NodeSpec*> by_id;
    for (const NodeSpec& n : scenario.nodes) by_id[n.id] = &n;

    // Frozen per-link shadowing (block fading).
    std::unordered_map<std::string, double> shadow_memo;
    auto link_loss_db = [&](const NodeSpec& a, const NodeSpec& b) {
        double d = std::hypot(a.x_m - b.x_m, a.y_m - b.y_m);
        double loss = path_loss_db(d, scenario.rf);
        if (scenario.rf.shadowing_sigma_db > 0) {
            std::string key = a.id < b.id ? a.id + "|" + b.id : b.id + "|" + a.id;
            auto [it, fresh] = shadow_memo.try_emplace(key, 0.0);
            if (fresh) {
                it->second = shadowing_db(scenario.seed, a.id, b.id,
                                          scenario.rf.shadowing_sigma_db);
            }
            loss += it->second;
        }
        return loss;
    };
    // Deterministic mean loss, what a planning attacker assumes.
    auto mean_loss_db = [&](const NodeSpec& a, const NodeSpec& b) {
        return path_loss_db(std::hypot(a.x_m - b.x_m, a.y_m - b.y_m), scenario.rf);
    };

    // Guardian enforcement and intent timelines.
    const double latency_us = scenario.effective_reconfig_latency_us();
    std::vector<GuardianState> guardians;
    std::unordered_map<std::string, std::size_t> guardian_idx;
    for (const NodeSpec& n : scenario.nodes) {
        if (n.role != Role::guardian) continue;
        GuardianState g;
        g.node = &n;
        RuleChain initial = n.chain.value_or(RuleChain{});
        g.phases.push_back({-1.0, initial});
        g.intent.push_back({-1.0, initial});
        guardian_idx[n.id] = guardians.size();
        guardians.push_back(std::move(g));
    }
    {
        std::vector<std::size_t> order(scenario.rule_updates.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return scenario.rule_updates[a].time_s < scenario.rule_updates[b].time_s;
        });
        for (std::size_t i : order) {
            const RuleUpdate& u = scenario.rule_updates[i];
            GuardianState& g = guardians[guardian_idx.at(u.guardian)];
            double t_us = u.time_s * 1e6;
            g.phases.push_back({t_us, std::nullopt});
            g.phases.push_back({t_us + latency_us, u.chain});
            g.intent.push_back({t_us, u.chain});
        }
        for (GuardianState& g : guardians) {
            std::stable_sort(g.phases.begin(), g.phases.end(),
                             [](const auto& a, const auto& b) { return a.from_us < b.from_us; });
            std::stable_sort(g.intent.begin(), g.intent.end(),
                             [](const auto& a, const auto& b) { return a.from_us < b.from_us; });
        }
    }

    // Schedule frames. Stealthy sources pick the midpoint of their power
    // window against the victim and all guardians (mean channel, no
    // shadowing) and abstain entirely when it is empty; with no guardians
    // deployed there is nothing to hide from and the node power is used.
    std::vector<SimFrame> frames;
    std::vector<double> flow_airtime_us(scenario.flows.size(), 0.0);
    for (std::size_t fi = 0; fi < scenario.flows.size(); ++fi) {
        const TrafficFlow& flow = scenario.flows[fi];
        const NodeSpec& src = *by_id.at(flow.src);
        const NodeSpec& dst = *by_id.at(flow.dst);

        double ptx = src.tx_power_dbm;
        if (flow.strategy == AttackerStrategy::stealthy && !guardians.empty()) {
            double lo = dst.sensitivity_dbm + mean_loss_db(src, dst);
            double hi = std::numeric_limits<double>::infinity();
            for (const GuardianState& g : guardians) {
                hi = std::min(hi, g.node->sensitivity_dbm + mean_loss_db(src, *g.node));
            }
            if (lo >= hi) continue; // no stealthy power exists: abstain
            ptx = 0.5 * (lo + hi);
        }

        Frame proto = build_frame(flow, src, dst, 0);
        flow_airtime_us[fi] = frame_airtime_us(proto.total_bytes());

        const double period_us = 1e6 / flow.rate_pps;
        const double begin_us = flow.start_s * 1e6;
        const double end_us = flow.end_s * 1e6;
        for (std::uint64_t k = 0;; ++k) {
            double t = begin_us + static_cast<double>(k) * period_us;
            if (t >= end_us) break;
            frames.push_back({t, t, fi, k, ptx});
        }
    }
    std::stable_sort(frames.begin(), frames.end(), [](const SimFrame& a, const SimFrame& b) {
        if (a.nominal_us != b.nominal_us) return a.nominal_us < b.nominal_us;
        if (a.flow_idx != b.flow_idx) return a.flow_idx < b.flow_idx;
        return a.k < b.k;
    });

    // Nodes perform carrier sensing: a frame whose nominal start falls
    // into an ongoing transmission defers until the channel clears.
    if (scenario.carrier_sense) {
        double busy_until = -1.0;
        for (SimFrame& f : frames) {
            f.start_us = std::max(f.nominal_us, busy_until);
            busy_until = f.start_us + flow_airtime_us[f.flow_idx];
        }
    }

    // Per-frame processing.
    StatsReport report;
    report.duration_s = scenario.duration_s;
    report.seed = scenario.seed;
    std::map<std::pair<std::int64_t, std::size_t>, StatsRow> rows; // (interval, flow)
    for (const TrafficFlow& flow : scenario.flows) report.flow_totals[flow.id];
    for (const GuardianState& g : guardians) report.guardian_totals[g.node->id];

    const double interval_us = scenario.stats_interval_s * 1e6;
    const double gamma_eff = scenario.rf.gamma_eff_db();

    for (const SimFrame& sf : frames) {
        const TrafficFlow& flow = scenario.flows[sf.flow_idx];
        const NodeSpec& src = *by_id.at(flow.src);
        const NodeSpec& dst = *by_id.at(flow.dst);
        Frame frame = build_frame(flow, src, dst, sf.k);
        const int bytes = frame.total_bytes();

        bool intended_drop = false;
        std::vector<JamAtReceiver> jams;
        double jam_airtime_us = 0.0;

        for (GuardianState& g : guardians) {
            double rx_g = sf.ptx_dbm - link_loss_db(src, *g.node);
            Frame observed = frame;
            observed.rss_dbm = rx_g;

            if (evaluate_chain(g.intent_at(sf.start_us), observed).verdict == Verdict::DROP) {
                intended_drop = true;
            }
            if (rx_g < g.node->sensitivity_dbm) continue; // Condition 1 fails

            const TimingModel& timing = *g.node->timing;

            // Classification starts once the deepest inspected byte has
            // arrived; the chain in force at that instant decides. The
            // depth depends on the chain, so settle by iteration.
            const GuardianState::Phase* phase = &g.phase_at(sf.start_us);
            double classify_at = sf.start_us;
            for (int iter = 0; iter < 4; ++iter) {
                int depth = phase->chain ? lenient_depth(*phase->chain, observed)
                                         : field_offset(observed, FieldRef::of(FieldRef::Kind::fcf));
                classify_at = sf.start_us + depth * kUsPerByte + timing.rx_delay_us;
                const GuardianState::Phase* next = &g.phase_at(classify_at);
                if (next == phase) break;
                phase = next;
            }
            if (!phase->chain) continue; // mid-reconfig: nothing is classified

            EvalResult res = evaluate_chain(*phase->chain, observed);
            if (res.verdict != Verdict::DROP) continue;

            double t_decide = decide_time_us(*phase->chain, timing.decision);
            JamAtReceiver jam;
            jam.start_us = classify_at + t_decide + timing.t_init_us;
            jam.duration_us = timing.t_interfere_us;
            jam.rx_power_dbm = g.node->jam_power_dbm - link_loss_db(*g.node, dst);
            jams.push_back(jam);

            GuardianTotals& gt = report.guardian_totals[g.node->id];
            gt.jams += 1;
            gt.jam_airtime_us += timing.t_interfere_us;
            jam_airtime_us += timing.t_interfere_us;
        }

        double rx_v = sf.ptx_dbm - link_loss_db(src, dst);
        Outcome outcome = reception_outcome(sf.start_us, bytes, rx_v, dst.sensitivity_dbm, jams,
                                            gamma_eff, scenario.min_overlap_us);

        std::int64_t interval = static_cast<std::int64_t>(std::floor(sf.start_us / interval_us));
        auto [it, fresh] = rows.try_emplace({interval, sf.flow_idx});
        StatsRow& row = it->second;
        if (fresh) {
            row.interval_start_s = static_cast<double>(interval) * scenario.stats_interval_s;
            row.flow_id = flow.id;
        }
        FlowTotals& totals = report.flow_totals[flow.id];

        row.sent += 1;
        totals.sent += 1;
        switch (outcome) {
        case Outcome::received:
            row.received += 1;
            totals.received += 1;
            break;
        case Outcome::destroyed:
            row.destroyed += 1;
            totals.destroyed += 1;
            break;
        case Outcome::below_sensitivity:
            row.below_sensitivity += 1;
            totals.below_sensitivity += 1;
            break;
        }
        if (intended_drop && outcome == Outcome::received) {
            row.false_neg += 1;
            totals.false_neg += 1;
        }
        if (!intended_drop && outcome == Outcome::destroyed) {
            row.false_pos += 1;
            totals.false_pos += 1;
        }
        row.jam_airtime_us += jam_airtime_us;
    }

    report.rows.reserve(rows.size());
    for (auto& [key, row] : rows) report.rows.push_back(std::move(row));
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization

std::string StatsReport::to_csv() const
{
    std::string out = "interval_start_s,flow_id,sent,received,destroyed,below_sensitivity,"
                      "false_pos,false_neg,jam_airtime_us\n";
    char buf[256];
    for (const StatsRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%llu,%llu,%llu,%llu,%llu,%llu,%.2f\n",
                      format_interval(r.interval_start_s).c_str(), r.flow_id.c_str(),
                      static_cast<unsigned long long>(r.sent),
                      static_cast<unsigned long long>(r.received),
                      static_cast<unsigned long long>(r.destroyed),
                      static_cast<unsigned long long>(r.below_sensitivity),
                      static_cast<unsigned long long>(r.false_pos),
                      static_cast<unsigned long long>(r.false_neg), r.jam_airtime_us);
        out += buf;
    }
    return out;
}

std::string StatsReport::to_json() const
{
    nlohmann::ordered_json j;
    j["duration_s"] = duration_s;
    j["seed"] = seed;
    nlohmann::ordered_json flows = nlohmann::ordered_json::object();
    for (const auto& [id, t] : flow_totals) {
        flows[id] = {
            {"sent", t.sent},
            {"received", t.received},
            {"destroyed", t.destroyed},
            {"below_sensitivity", t.below_sensitivity},
            {"false_pos", t.false_pos},
            {"false_neg", t.false_neg},
        };
    }
    j["flows"] = std::move(flows);
    nlohmann::ordered_json gj = nlohmann::ordered_json::object();
    for (const auto& [id, t] : guardian_totals) {
        double airtime = std::round(t.jam_airtime_us * 100.0) / 100.0;
        gj[id] = {{"jams", t.jams}, {"jam_airtime_us", airtime}};
    }
    j["guardians"] = std::move(gj);
    return j.dump(2) + "\n";
}

} // namespace airguard
