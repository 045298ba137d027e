#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "airguard/frame.hpp"

namespace airguard {

enum class Verdict : std::uint8_t { ACCEPT, DROP };

std::string to_string(Verdict v);

// One gtables match. A match fires when every set parameter agrees with
// the frame; src/dst compare the concatenation of their set pan/addr
// parameters, so a pan+addr match is a 32-bit field in the sense of the
// Hamming tolerance.
struct Match {
    enum class Kind : std::uint8_t { src, dst, type, rss, nw_ctrl, asl_cmd, raw_byte };
    enum class RssDir : std::uint8_t { above, below };

    Kind kind = Kind::dst;
    std::optional<std::uint16_t> addr;     // src/dst
    std::optional<std::uint16_t> pan;      // src/dst
    std::optional<FrameType> frame_type;   // type
    std::optional<double> rss_threshold;   // rss, dBm
    RssDir rss_dir = RssDir::above;
    std::optional<std::uint16_t> nw_ctrl;  // 16-bit NWK frame control literal
    std::optional<std::uint8_t> asl_cmd;   // APS command id literal
    std::optional<int> offset;             // raw_byte, 0-based payload index
    std::optional<std::uint8_t> value;     // raw_byte literal
    int hamming_tolerance = 0;

    // Bit width of the matched field (pan/addr concatenation for
    // src/dst). Used to validate the tolerance.
    int matched_bits() const;

    // Fields this match reads, for inspection-depth resolution.
    std::vector<FieldRef> fields() const;

    // Throws EvalError for an rss match against a frame without rss_dbm.
    bool fires(const Frame& frame) const;

    // Throws ValidationError on out-of-range parameters.
    void validate() const;

    bool operator==(const Match&) const = default;
};

std::string to_string(Match::Kind k);

// A rule fires iff all its matches fire (conjunction).
struct Rule {
    std::vector<Match> matches;
    Verdict verdict = Verdict::DROP;

    bool operator==(const Rule&) const = default;
};

// First firing rule determines the verdict; an empty chain yields the
// default verdict. Chains are immutable after parse.
struct RuleChain {
    std::vector<Rule> rules;
    Verdict default_verdict = Verdict::ACCEPT;

    bool operator==(const RuleChain&) const = default;
};

// Parses one gtables rule line, e.g.
//   gtables -A -m dst --pan 0x22 --addr 0xFFFF -m type --ctrl -j DROP
// --ctrl/--control are aliases; nw_ctrl/asl_cmd take their literal either
// bare or as --value; --tol N sets the Hamming tolerance of a match.
// Throws ParseError with the 1-indexed column of the offending token.
Rule parse_rule_line(std::string_view text);

// One rule per line; '#' starts a comment; blank lines ignored.
RuleChain parse_rules_text(std::string_view text);
RuleChain load_rules_file(const std::filesystem::path& path);

// Canonical text form; parse_rule_line(render_rule(r)) == r.
std::string render_rule(const Rule& rule);

struct EvalResult {
    Verdict verdict = Verdict::ACCEPT;
    std::optional<std::size_t> rule_index; // fired rule, absent on default verdict

    bool operator==(const EvalResult&) const = default;
};

// First-match semantics. ACCEPT rules short-circuit like iptables.
EvalResult evaluate_chain(const RuleChain& chain, const Frame& frame);

// Last frame byte the chain must observe before it can render a verdict:
// max field offset over all matches, never below the FCF (offset 8) the
// framer needs to parse at all. A src pan probe on a PAN-compressed
// layout resolves to the dst_pan bytes that carry the value.
// Throws ValidationError naming the match whose field the layout lacks.
int chain_inspection_depth(const RuleChain& chain, const Frame& layout);

// Worst-case rule-checker execution time model. The firmware variant
// charges a fixed entry cost plus per-rule and per-match costs for a
// full traversal; the FPGA variant is constant in chain size.
struct DecisionCostModel {
    enum class Variant : std::uint8_t { firmware, fpga };

    Variant variant = Variant::fpga;
    double c_base_us = 4.03;     // interrupt entry + trigger, per packet
    double c_rule_us = 0.26;     // chain traversal per rule
    double c_dispatch_us = 0.34; // match function call overhead
    double c_exec_us = 1.86;     // representative match body (address match)
    double fpga_const_us = 10.0;

    static DecisionCostModel firmware_defaults();
    static DecisionCostModel fpga_defaults();

    void validate() const; // all coefficients >= 0

    bool operator==(const DecisionCostModel&) const = default;
};

double decide_time_us(const RuleChain& chain, const DecisionCostModel& model);

} // namespace airguard
