#include "airguard/rules.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "airguard/errors.hpp"

namespace airguard {

std::string to_string(Verdict v)
{
    return v == Verdict::DROP ? "DROP" : "ACCEPT";
}

std::string to_string(Match::Kind k)
{
    switch (k) {
    case Match::Kind::src: return "src";
    case Match::Kind::dst: return "dst";
    case Match::Kind::type: return "type";
    case Match::Kind::rss: return "rss";
    case Match::Kind::nw_ctrl: return "nw_ctrl";
    case Match::Kind::asl_cmd: return "asl_cmd";
    case Match::Kind::raw_byte: return "raw_byte";
    }
    return "?";
}

int Match::matched_bits() const
{
    switch (kind) {
    case Kind::src:
    case Kind::dst:
        return 16 * ((addr ? 1 : 0) + (pan ? 1 : 0));
    case Kind::type: return 3;
    case Kind::rss: return 0;
    case Kind::nw_ctrl: return 16;
    case Kind::asl_cmd: return 8;
    case Kind::raw_byte: return 8;
    }
    return 0;
}

void Match::validate() const
{
    bool has_param = addr || pan || frame_type || rss_threshold || nw_ctrl || asl_cmd ||
                     (offset && value);
    if (!has_param) {
        throw ValidationError("match", "a " + to_string(kind) + " match needs a parameter");
    }
    if (hamming_tolerance < 0) {
        throw ValidationError("tol", "negative Hamming tolerance");
    }
    if (kind == Kind::rss) {
        if (hamming_tolerance != 0) {
            throw ValidationError("tol", "an rss match has no bit field to tolerate errors in");
        }
        return;
    }
    if (hamming_tolerance >= matched_bits()) {
        throw ValidationError("tol", "tolerance " + std::to_string(hamming_tolerance) +
                                         " not below the matched field width of " +
                                         std::to_string(matched_bits()) + " bits");
    }
    if (kind == Kind::raw_byte) {
        if (!offset || !value) {
            throw ValidationError("raw_byte", "needs both --offset and --value");
        }
        if (*offset < 0) throw ValidationError("offset", "negative payload byte index");
    }
}

std::vector<FieldRef> Match::fields() const
{
    using K = FieldRef::Kind;
    switch (kind) {
    case Kind::src: {
        std::vector<FieldRef> f;
        if (pan) f.push_back(FieldRef::of(K::src_pan));
        if (addr) f.push_back(FieldRef::of(K::src_addr));
        return f;
    }
    case Kind::dst: {
        std::vector<FieldRef> f;
        if (pan) f.push_back(FieldRef::of(K::dst_pan));
        if (addr) f.push_back(FieldRef::of(K::dst_addr));
        return f;
    }
    case Kind::type: return {FieldRef::of(K::frame_type)};
    case Kind::rss: return {FieldRef::of(K::rss)};
    case Kind::nw_ctrl: return {FieldRef::of(K::nw_ctrl)};
    case Kind::asl_cmd: return {FieldRef::of(K::asl_cmd)};
    case Kind::raw_byte: return {FieldRef::payload_byte(offset.value_or(0))};
    }
    return {};
}

namespace {

// Hamming-tolerant equality over an up-to-64-bit field.
bool within_tolerance(std::uint64_t observed, std::uint64_t literal, int tolerance)
{
    return std::popcount(observed ^ literal) <= tolerance;
}

} // namespace

bool Match::fires(const Frame& frame) const
{
    switch (kind) {
    case Kind::src:
    case Kind::dst: {
        bool is_src = kind == Kind::src;
        auto frame_pan = is_src ? frame.effective_src_pan() : frame.dst_pan;
        auto frame_addr = is_src ? frame.src_addr : frame.dst_addr;
        AddrMode mode = is_src ? frame.src_mode() : frame.dst_mode();

        // The concatenation of the set parameters forms one field.
        std::uint64_t observed = 0, literal = 0;
        if (pan) {
            if (!frame_pan) return false;
            observed = *frame_pan;
            literal = *pan;
        }
        if (addr) {
            if (!frame_addr || mode != AddrMode::short16) return false;
            observed = observed << 16 | static_cast<std::uint16_t>(*frame_addr);
            literal = literal << 16 | *addr;
        }
        return within_tolerance(observed, literal, hamming_tolerance);
    }
    case Kind::type:
        return within_tolerance(static_cast<std::uint64_t>(frame.type()),
                                static_cast<std::uint64_t>(*frame_type), hamming_tolerance);
    case Kind::rss: {
        if (!frame.rss_dbm) {
            throw EvalError("rss match evaluated against a frame without reception metadata");
        }
        return rss_dir == RssDir::above ? *frame.rss_dbm > *rss_threshold
                                        : *frame.rss_dbm < *rss_threshold;
    }
    case Kind::nw_ctrl: {
        if (frame.payload.size() < static_cast<std::size_t>(kNwCtrlPayloadIndex + 2)) {
            return false;
        }
        std::uint16_t observed = static_cast<std::uint16_t>(
            frame.payload[kNwCtrlPayloadIndex] |
            frame.payload[kNwCtrlPayloadIndex + 1] << 8);
        return within_tolerance(observed, *nw_ctrl, hamming_tolerance);
    }
    case Kind::asl_cmd: {
        if (frame.payload.size() <= static_cast<std::size_t>(kAslCmdPayloadIndex)) return false;
        return within_tolerance(frame.payload[kAslCmdPayloadIndex], *asl_cmd,
                                hamming_tolerance);
    }
    case Kind::raw_byte: {
        if (*offset >= static_cast<int>(frame.payload.size())) return false;
        return within_tolerance(frame.payload[static_cast<std::size_t>(*offset)], *value,
                                hamming_tolerance);
    }
    }
    return false;
}

// ---------------------------------------------------------------------------
// gtables parser

namespace {

struct Token {
    std::string_view text;
    std::size_t column; // 1-indexed
};

std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        tokens.push_back({line.substr(start, i - start), start + 1});
    }
    return tokens;
}

struct TokenStream {
    std::vector<Token> tokens;
    std::size_t idx = 0;
    std::size_t line_len = 0;

    bool done() const { return idx >= tokens.size(); }
    const Token& peek() const { return tokens[idx]; }
    Token next()
    {
        if (done()) throw ParseError("unexpected end of rule", line_len + 1);
        return tokens[idx++];
    }
    std::size_t here() const { return done() ? line_len + 1 : tokens[idx].column; }
};

std::uint64_t parse_uint(const Token& tok, std::uint64_t max, const char* what)
{
    std::string_view s = tok.text;
    int base = 10;
    if (s.starts_with("0x") || s.starts_with("0X")) {
        s.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(std::string("malformed ") + what + " literal '" +
                             std::string(tok.text) + "'",
                         tok.column);
    }
    if (v > max) {
        throw ParseError(std::string(what) + " literal '" + std::string(tok.text) +
                             "' out of range",
                         tok.column);
    }
    return v;
}

double parse_double(const Token& tok, const char* what)
{
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), v);
    if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size()) {
        throw ParseError(std::string("malformed ") + what + " value '" +
                             std::string(tok.text) + "'",
                         tok.column);
    }
    return v;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

Match parse_match(TokenStream& ts)
{
    Token kind_tok = ts.next();
    std::string kind_name = lower(kind_tok.text);

    Match m;
    if (kind_name == "src") m.kind = Match::Kind::src;
    else if (kind_name == "dst") m.kind = Match::Kind::dst;
    else if (kind_name == "type") m.kind = Match::Kind::type;
    else if (kind_name == "rss") m.kind = Match::Kind::rss;
    else if (kind_name == "nw_ctrl") m.kind = Match::Kind::nw_ctrl;
    else if (kind_name == "asl_cmd") m.kind = Match::Kind::asl_cmd;
    else if (kind_name == "raw_byte") m.kind = Match::Kind::raw_byte;
    else {
        throw ParseError("unknown match kind '" + std::string(kind_tok.text) + "'",
                         kind_tok.column);
    }

    auto set_tol = [&](const Token& flag) {
        (void)flag;
        m.hamming_tolerance = static_cast<int>(parse_uint(ts.next(), 64, "tolerance"));
    };

    // Parameters last until the next -m / -j.
    while (!ts.done() && ts.peek().text != "-m" && ts.peek().text != "-j") {
        Token t = ts.next();
        std::string flag = lower(t.text);
        switch (m.kind) {
        case Match::Kind::src:
        case Match::Kind::dst:
            if (flag == "--addr") {
                m.addr = static_cast<std::uint16_t>(parse_uint(ts.next(), 0xFFFF, "address"));
            } else if (flag == "--pan") {
                m.pan = static_cast<std::uint16_t>(parse_uint(ts.next(), 0xFFFF, "PAN"));
            } else if (flag == "--tol") {
                set_tol(t);
            } else {
                throw ParseError("unexpected token '" + std::string(t.text) + "' in " +
                                     to_string(m.kind) + " match",
                                 t.column);
            }
            break;
        case Match::Kind::type:
            if (flag == "--ctrl" || flag == "--control") m.frame_type = FrameType::control;
            else if (flag == "--data") m.frame_type = FrameType::data;
            else if (flag == "--beacon") m.frame_type = FrameType::beacon;
            else if (flag == "--ack") m.frame_type = FrameType::ack;
            else if (flag == "--tol") set_tol(t);
            else {
                throw ParseError("unknown frame type flag '" + std::string(t.text) + "'",
                                 t.column);
            }
            break;
        case Match::Kind::rss:
            if (flag == "--above") {
                m.rss_dir = Match::RssDir::above;
                m.rss_threshold = parse_double(ts.next(), "RSS threshold");
            } else if (flag == "--below") {
                m.rss_dir = Match::RssDir::below;
                m.rss_threshold = parse_double(ts.next(), "RSS threshold");
            } else {
                throw ParseError("unexpected token '" + std::string(t.text) +
                                     "' in rss match (--above/--below)",
                                 t.column);
            }
            break;
        case Match::Kind::nw_ctrl:
            if (flag == "--value") t = ts.next();
            else if (flag == "--tol") { set_tol(t); break; }
            m.nw_ctrl =
                static_cast<std::uint16_t>(parse_uint(t, 0xFFFF, "NWK frame control"));
            break;
        case Match::Kind::asl_cmd:
            if (flag == "--value") t = ts.next();
            else if (flag == "--tol") { set_tol(t); break; }
            m.asl_cmd = static_cast<std::uint8_t>(parse_uint(t, 0xFF, "APS command"));
            break;
        case Match::Kind::raw_byte:
            if (flag == "--offset") {
                m.offset = static_cast<int>(parse_uint(ts.next(), 126, "payload offset"));
            } else if (flag == "--value") {
                m.value = static_cast<std::uint8_t>(parse_uint(ts.next(), 0xFF, "byte"));
            } else if (flag == "--tol") {
                set_tol(t);
            } else {
                throw ParseError("unexpected token '" + std::string(t.text) +
                                     "' in raw_byte match",
                                 t.column);
            }
            break;
        }
    }

    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw ParseError(e.what(), kind_tok.column);
    }
    return m;
}

} // namespace

Rule parse_rule_line(std::string_view text)
{
    TokenStream ts{tokenize(text), 0, text.size()};
    if (ts.done() || ts.next().text != "gtables") {
        throw ParseError("rule must start with 'gtables'", 1);
    }
    if (ts.done() || ts.peek().text != "-A") {
        throw ParseError("expected -A (append)", ts.here());
    }
    ts.next();

    Rule rule;
    bool have_verdict = false;
    while (!ts.done()) {
        Token t = ts.next();
        if (t.text == "-m") {
            rule.matches.push_back(parse_match(ts));
        } else if (t.text == "-j") {
            Token v = ts.next();
            if (v.text == "DROP") rule.verdict = Verdict::DROP;
            else if (v.text == "ACCEPT") rule.verdict = Verdict::ACCEPT;
            else throw ParseError("unknown verdict '" + std::string(v.text) + "'", v.column);
            have_verdict = true;
            if (!ts.done()) {
                throw ParseError("trailing tokens after the verdict", ts.here());
            }
        } else {
            throw ParseError("expected -m or -j, got '" + std::string(t.text) + "'", t.column);
        }
    }
    if (!have_verdict) {
        throw ParseError("missing -j verdict", ts.here());
    }
    return rule;
}

RuleChain parse_rules_text(std::string_view text)
{
    RuleChain chain;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        ++line_no;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        if (auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (blank) continue;
        if (line.ends_with('\r')) line.remove_suffix(1);
        try {
            chain.rules.push_back(parse_rule_line(line));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what(),
                             e.position());
        }
    }
    return chain;
}

RuleChain load_rules_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open rules file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_rules_text(buf.str());
}

namespace {

std::string hex16(std::uint16_t v)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%04X", v);
    return buf;
}

std::string hex8(std::uint8_t v)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "0x%02X", v);
    return buf;
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

std::string render_rule(const Rule& rule)
{
    std::string out = "gtables -A";
    for (const Match& m : rule.matches) {
        out += " -m " + to_string(m.kind);
        switch (m.kind) {
        case Match::Kind::src:
        case Match::Kind::dst:
            if (m.pan) out += " --pan " + hex16(*m.pan);
            if (m.addr) out += " --addr " + hex16(*m.addr);
            break;
        case Match::Kind::type:
            out += " --" + to_string(*m.frame_type);
            break;
        case Match::Kind::rss:
            out += m.rss_dir == Match::RssDir::above ? " --above " : " --below ";
            out += format_double(*m.rss_threshold);
            break;
        case Match::Kind::nw_ctrl:
            out += " " + hex16(*m.nw_ctrl);
            break;
        case Match::Kind::asl_cmd:
            out += " " + hex8(*m.asl_cmd);
            break;
        case Match::Kind::raw_byte:
            out += " --offset " + std::to_string(*m.offset) + " --value " + hex8(*m.value);
            break;
        }
        if (m.hamming_tolerance > 0) {
            out += " --tol " + std::to_string(m.hamming_tolerance);
        }
    }
    out += " -j " + to_string(rule.verdict);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

EvalResult evaluate_chain(const RuleChain& chain, const Frame& frame)
{
    for (std::size_t i = 0; i < chain.rules.size(); ++i) {
        const Rule& rule = chain.rules[i];
        bool all = true;
        for (const Match& m : rule.matches) {
            if (!m.fires(frame)) {
                all = false;
                break;
            }
        }
        if (all) return {rule.verdict, i};
    }
    return {chain.default_verdict, std::nullopt};
}

int chain_inspection_depth(const RuleChain& chain, const Frame& layout)
{
    // The framer has to see the FCF before anything can be classified.
    int depth = field_offset(layout, FieldRef::of(FieldRef::Kind::fcf));

    for (std::size_t ri = 0; ri < chain.rules.size(); ++ri) {
        for (const Match& m : chain.rules[ri].matches) {
            for (FieldRef f : m.fields()) {
                // Under PAN compression the source PAN is carried by the
                // dst_pan bytes.
                if (f.kind == FieldRef::Kind::src_pan && layout.intra_pan() &&
                    !layout.src_pan) {
                    f = FieldRef::of(FieldRef::Kind::dst_pan);
                }
                try {
                    depth = std::max(depth, field_offset(layout, f));
                } catch (const ValidationError& e) {
                    throw ValidationError("rule " + std::to_string(ri) + " " +
                                              to_string(m.kind) + " match",
                                          e.what());
                }
            }
        }
    }
    return depth;
}

// ---------------------------------------------------------------------------
// Decision cost

DecisionCostModel DecisionCostModel::firmware_defaults()
{
    DecisionCostModel m;
    m.variant = Variant::firmware;
    return m;
}

DecisionCostModel DecisionCostModel::fpga_defaults()
{
    DecisionCostModel m;
    m.variant = Variant::fpga;
    return m;
}

void DecisionCostModel::validate() const
{
    if (c_base_us < 0 || c_rule_us < 0 || c_dispatch_us < 0 || c_exec_us < 0 ||
        fpga_const_us < 0) {
        throw ValidationError("decision", "cost coefficients must be non-negative");
    }
}

double decide_time_us(const RuleChain& chain, const DecisionCostModel& model)
{
    model.validate();
    if (model.variant == DecisionCostModel::Variant::fpga) {
        return model.fpga_const_us;
    }
    // Worst case: no rule fires and the whole chain is traversed.
    double t = model.c_base_us;
    for (const Rule& rule : chain.rules) {
        t += model.c_rule_us;
        t += static_cast<double>(rule.matches.size()) * (model.c_dispatch_us + model.c_exec_us);
    }
    return t;
}

} // namespace airguard
