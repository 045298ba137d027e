#include "airguard/frame.hpp"

#include <array>
#include <charconv>

#include "airguard/errors.hpp"

namespace airguard {

std::string to_string(FrameType t)
{
    switch (t) {
    case FrameType::beacon: return "beacon";
    case FrameType::data: return "data";
    case FrameType::ack: return "ack";
    case FrameType::control: return "control";
    }
    return "?";
}

FrameType frame_type_from_string(std::string_view s)
{
    if (s == "beacon") return FrameType::beacon;
    if (s == "data") return FrameType::data;
    if (s == "ack") return FrameType::ack;
    if (s == "control" || s == "ctrl") return FrameType::control;
    throw ValidationError("frame_type", "unknown frame type '" + std::string(s) + "'");
}

std::uint16_t make_fcf(FrameType type, AddrMode dst, AddrMode src, bool intra_pan,
                       bool ack_request)
{
    std::uint16_t fcf = static_cast<std::uint16_t>(type);
    if (ack_request) fcf |= 1u << 5;
    if (intra_pan) fcf |= 1u << 6;
    fcf |= static_cast<std::uint16_t>(dst) << 10;
    fcf |= static_cast<std::uint16_t>(src) << 14;
    return fcf;
}

std::optional<std::uint16_t> Frame::effective_src_pan() const
{
    if (src_pan) return src_pan;
    if (intra_pan() && src_mode() != AddrMode::none) return dst_pan;
    return std::nullopt;
}

static int addr_len(AddrMode m)
{
    switch (m) {
    case AddrMode::none: return 0;
    case AddrMode::short16: return 2;
    case AddrMode::ext64: return 8;
    }
    return 0;
}

int Frame::mhr_len() const
{
    int len = 3; // fcf + seq
    if (dst_mode() != AddrMode::none) len += 2 + addr_len(dst_mode());
    if (src_mode() != AddrMode::none) len += (intra_pan() ? 0 : 2) + addr_len(src_mode());
    return len;
}

bool Frame::operator==(const Frame& other) const
{
    return sfd == other.sfd && fcf == other.fcf && seq == other.seq &&
           dst_pan == other.dst_pan && dst_addr == other.dst_addr &&
           src_pan == other.src_pan && src_addr == other.src_addr &&
           payload == other.payload;
}

Frame ack_frame(std::uint8_t seq)
{
    Frame f;
    f.fcf = make_fcf(FrameType::ack, AddrMode::none, AddrMode::none, false);
    f.seq = seq;
    return f;
}

Frame intra_pan_data_frame(std::uint16_t pan, std::uint16_t dst_addr, std::uint16_t src_addr,
                           std::vector<std::uint8_t> payload, FrameType type)
{
    Frame f;
    f.fcf = make_fcf(type, AddrMode::short16, AddrMode::short16, true);
    f.dst_pan = pan;
    f.dst_addr = dst_addr;
    f.src_addr = src_addr;
    f.payload = std::move(payload);
    return f;
}

// ---------------------------------------------------------------------------
// FieldRef

std::string FieldRef::name() const
{
    switch (kind) {
    case Kind::sfd: return "sfd";
    case Kind::fcf: return "fcf";
    case Kind::seq: return "seq";
    case Kind::dst_pan: return "dst_pan";
    case Kind::dst_addr: return "dst_addr";
    case Kind::src_pan: return "src_pan";
    case Kind::src_addr: return "src_addr";
    case Kind::frame_type: return "frame_type";
    case Kind::payload_byte: return "payload_byte:" + std::to_string(index);
    case Kind::nw_ctrl: return "nw_ctrl";
    case Kind::asl_cmd: return "asl_cmd";
    case Kind::rss: return "rss";
    }
    return "?";
}

FieldRef FieldRef::parse(std::string_view name)
{
    if (name.starts_with("payload_byte:")) {
        auto digits = name.substr(13);
        int idx = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || idx < 0) {
            throw ValidationError("field", "bad payload byte index in '" + std::string(name) + "'");
        }
        return payload_byte(idx);
    }
    static const std::array<std::pair<std::string_view, Kind>, 11> names{{
        {"sfd", Kind::sfd},
        {"fcf", Kind::fcf},
        {"seq", Kind::seq},
        {"dst_pan", Kind::dst_pan},
        {"dst_addr", Kind::dst_addr},
        {"src_pan", Kind::src_pan},
        {"src_addr", Kind::src_addr},
        {"frame_type", Kind::frame_type},
        {"nw_ctrl", Kind::nw_ctrl},
        {"asl_cmd", Kind::asl_cmd},
        {"rss", Kind::rss},
    }};
    for (auto [n, k] : names) {
        if (name == n) return of(k);
    }
    throw ValidationError("field", "unknown field '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// FCS: ITU-T CRC-16, poly x^16+x^12+x^5+1, zero init, bit-reflected
// (0x8408 in reflected form).

namespace {

constexpr std::array<std::uint16_t, 256> make_fcs_table()
{
    std::array<std::uint16_t, 256> table{};
    for (int i = 0; i < 256; ++i) {
        std::uint16_t crc = static_cast<std::uint16_t>(i);
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0x8408) : crc >> 1;
        }
        table[static_cast<std::size_t>(i)] = crc;
    }
    return table;
}

constexpr auto kFcsTable = make_fcs_table();

} // namespace

std::uint16_t compute_fcs(std::span<const std::uint8_t> mpdu_without_fcs)
{
    std::uint16_t crc = 0x0000;
    for (std::uint8_t b : mpdu_without_fcs) {
        crc = static_cast<std::uint16_t>((crc >> 8) ^ kFcsTable[(crc ^ b) & 0xFF]);
    }
    return crc;
}

// ---------------------------------------------------------------------------
// Encode / decode

namespace {

void check_addressing(const Frame& f)
{
    auto require = [](bool present, bool wanted, const char* field) {
        if (present && !wanted) {
            throw ValidationError(field, "set but the FCF addressing mode omits it");
        }
        if (!present && wanted) {
            throw ValidationError(field, "required by the FCF addressing mode but absent");
        }
    };

    AddrMode dst = f.dst_mode();
    AddrMode src = f.src_mode();
    if ((f.fcf >> 10 & 0x3) == 1 || (f.fcf >> 14 & 0x3) == 1) {
        throw ValidationError("fcf", "reserved addressing mode 1");
    }
    if (f.intra_pan() && (dst == AddrMode::none || src == AddrMode::none)) {
        throw ValidationError("fcf", "PAN compression needs both addresses present");
    }

    require(f.dst_pan.has_value(), dst != AddrMode::none, "dst_pan");
    require(f.dst_addr.has_value(), dst != AddrMode::none, "dst_addr");
    require(f.src_addr.has_value(), src != AddrMode::none, "src_addr");
    require(f.src_pan.has_value(), src != AddrMode::none && !f.intra_pan(), "src_pan");

    if (dst == AddrMode::short16 && f.dst_addr && *f.dst_addr > 0xFFFF) {
        throw ValidationError("dst_addr", "does not fit the 16-bit addressing mode");
    }
    if (src == AddrMode::short16 && f.src_addr && *f.src_addr > 0xFFFF) {
        throw ValidationError("src_addr", "does not fit the 16-bit addressing mode");
    }
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i) & 0xFF));
}

} // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame)
{
    check_addressing(frame);
    if (frame.phy_len() > kMaxPhyLen) {
        throw ValidationError("phy_len", "MPDU of " + std::to_string(frame.phy_len()) +
                                             " bytes exceeds the 127-byte limit");
    }

    std::vector<std::uint8_t> out;
    out.reserve(static_cast<std::size_t>(frame.total_bytes()));
    out.insert(out.end(), kPreambleLen, 0x00);
    out.push_back(frame.sfd);
    out.push_back(static_cast<std::uint8_t>(frame.phy_len()));

    std::size_t mpdu_begin = out.size();
    put_u16(out, frame.fcf);
    out.push_back(frame.seq);
    if (frame.dst_mode() != AddrMode::none) {
        put_u16(out, *frame.dst_pan);
        if (frame.dst_mode() == AddrMode::short16) {
            put_u16(out, static_cast<std::uint16_t>(*frame.dst_addr));
        } else {
            put_u64(out, *frame.dst_addr);
        }
    }
    if (frame.src_mode() != AddrMode::none) {
        if (!frame.intra_pan()) put_u16(out, *frame.src_pan);
        if (frame.src_mode() == AddrMode::short16) {
            put_u16(out, static_cast<std::uint16_t>(*frame.src_addr));
        } else {
            put_u64(out, *frame.src_addr);
        }
    }
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());

    std::uint16_t fcs =
        compute_fcs({out.data() + mpdu_begin, out.size() - mpdu_begin});
    put_u16(out, fcs);
    return out;
}

namespace {

// Cursor over the frame bytes; offsets in errors are 1-indexed.
struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    std::uint8_t u8(const char* what)
    {
        if (pos >= bytes.size()) {
            throw ParseError(std::string("truncated input reading ") + what, pos + 1);
        }
        return bytes[pos++];
    }

    std::uint16_t u16(const char* what)
    {
        std::uint16_t lo = u8(what);
        std::uint16_t hi = u8(what);
        return static_cast<std::uint16_t>(hi << 8 | lo);
    }

    std::uint64_t u64(const char* what)
    {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8(what)) << (8 * i);
        return v;
    }
};

} // namespace

Frame decode_frame(std::span<const std::uint8_t> bytes)
{
    Reader r{bytes};
    for (int i = 0; i < kPreambleLen; ++i) {
        if (r.u8("preamble") != 0x00) {
            throw ParseError("preamble byte is not 0x00", r.pos);
        }
    }

    Frame f;
    f.sfd = r.u8("SFD");
    int phy_len = r.u8("PHR");
    if (phy_len > kMaxPhyLen) {
        throw ParseError("PHR exceeds the 127-byte limit", r.pos);
    }
    if (bytes.size() != static_cast<std::size_t>(kShrPhrLen + phy_len)) {
        throw ParseError("input length does not match PHR (" + std::to_string(phy_len) +
                             " MPDU bytes expected)",
                         bytes.size());
    }
    if (phy_len < 3 + kFcsLen) {
        throw ParseError("MPDU too short for FCF, sequence number and FCS", r.pos);
    }

    std::size_t mpdu_begin = r.pos;
    f.fcf = r.u16("FCF");
    if ((f.fcf >> 10 & 0x3) == 1 || (f.fcf >> 14 & 0x3) == 1) {
        throw ParseError("reserved addressing mode in FCF", 8);
    }
    if (f.intra_pan() && (f.dst_mode() == AddrMode::none || f.src_mode() == AddrMode::none)) {
        throw ParseError("PAN compression without both addresses", 7);
    }
    f.seq = r.u8("sequence number");

    if (f.dst_mode() != AddrMode::none) {
        f.dst_pan = r.u16("destination PAN");
        f.dst_addr = f.dst_mode() == AddrMode::short16
                         ? std::uint64_t{r.u16("destination address")}
                         : r.u64("destination address");
    }
    if (f.src_mode() != AddrMode::none) {
        if (!f.intra_pan()) f.src_pan = r.u16("source PAN");
        f.src_addr = f.src_mode() == AddrMode::short16 ? std::uint64_t{r.u16("source address")}
                                                       : r.u64("source address");
    }

    std::size_t mpdu_end = kShrPhrLen + static_cast<std::size_t>(phy_len);
    if (r.pos + kFcsLen > mpdu_end) {
        throw ParseError("addressing fields overrun the MPDU", r.pos + 1);
    }
    f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(mpdu_end - kFcsLen));
    r.pos = mpdu_end - kFcsLen;
    f.fcs = r.u16("FCS");

    std::uint16_t computed =
        compute_fcs({bytes.data() + mpdu_begin, mpdu_end - kFcsLen - mpdu_begin});
    f.corrupt = computed != f.fcs;
    return f;
}

// ---------------------------------------------------------------------------
// Field offsets (1-indexed over the whole frame, preamble byte = 1)

int payload_start_offset(const Frame& layout)
{
    return kShrPhrLen + layout.mhr_len() + 1;
}

int field_offset(const Frame& layout, const FieldRef& field)
{
    using Kind = FieldRef::Kind;

    auto absent = [&](const char* why) -> int {
        throw ValidationError(field.name(), std::string(why) + " in this frame layout");
    };

    // Last byte of each region; addressing regions sit back to back
    // after the 3 MHR bytes.
    int cursor = kShrPhrLen + 3; // seq ends here
    int dst_pan_end = 0, dst_addr_end = 0, src_pan_end = 0, src_addr_end = 0;
    if (layout.dst_mode() != AddrMode::none) {
        dst_pan_end = cursor + 2;
        dst_addr_end = dst_pan_end + addr_len(layout.dst_mode());
        cursor = dst_addr_end;
    }
    if (layout.src_mode() != AddrMode::none) {
        if (!layout.intra_pan()) {
            src_pan_end = cursor + 2;
            cursor = src_pan_end;
        }
        src_addr_end = cursor + addr_len(layout.src_mode());
        cursor = src_addr_end;
    }

    switch (field.kind) {
    case Kind::sfd: return kPreambleLen + 1;
    case Kind::fcf: return kShrPhrLen + 2;
    case Kind::frame_type: return kShrPhrLen + 1; // type bits ride the first FCF byte
    case Kind::seq: return kShrPhrLen + 3;
    case Kind::dst_pan: return dst_pan_end ? dst_pan_end : absent("no destination PAN");
    case Kind::dst_addr: return dst_addr_end ? dst_addr_end : absent("no destination address");
    case Kind::src_pan: return src_pan_end ? src_pan_end : absent("no source PAN");
    case Kind::src_addr: return src_addr_end ? src_addr_end : absent("no source address");
    case Kind::payload_byte: {
        if (field.index < 0 || field.index >= static_cast<int>(layout.payload.size())) {
            return absent("payload byte index out of range");
        }
        return payload_start_offset(layout) + field.index;
    }
    case Kind::nw_ctrl: {
        if (layout.payload.size() < static_cast<std::size_t>(kNwCtrlPayloadIndex + 2)) {
            return absent("payload too short for the NWK frame control");
        }
        return payload_start_offset(layout) + kNwCtrlPayloadIndex + 1;
    }
    case Kind::asl_cmd: {
        if (layout.payload.size() <= static_cast<std::size_t>(kAslCmdPayloadIndex)) {
            return absent("payload too short for the APS command id");
        }
        return payload_start_offset(layout) + kAslCmdPayloadIndex;
    }
    case Kind::rss:
        // Signal strength is available once the receiver has synchronized.
        return kPreambleLen + 1;
    }
    return absent("unknown field");
}

double frame_airtime_us(int total_frame_bytes)
{
    return total_frame_bytes * kUsPerByte;
}

} // namespace airguard
