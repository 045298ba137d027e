#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airguard {

// 2.4 GHz O-QPSK PHY constants.
inline constexpr int kPreambleLen = 4;
inline constexpr std::uint8_t kSfd = 0xA7;
inline constexpr int kShrPhrLen = 6; // preamble + SFD + PHR
inline constexpr int kFcsLen = 2;
inline constexpr int kMaxPhyLen = 127;
inline constexpr double kSymbolUs = 16.0; // one 4-bit symbol
inline constexpr double kUsPerByte = 32.0; // 2 symbols per byte

enum class FrameType : std::uint8_t {
    beacon = 0,
    data = 1,
    ack = 2,
    control = 3, // MAC command frames
};

enum class AddrMode : std::uint8_t {
    none = 0,
    short16 = 2,
    ext64 = 3,
};

std::string to_string(FrameType t);
FrameType frame_type_from_string(std::string_view s);

// Frame control field layout (transmitted little-endian at bytes 7-8).
std::uint16_t make_fcf(FrameType type, AddrMode dst, AddrMode src, bool intra_pan,
                       bool ack_request = false);

// A decoded (or to-be-encoded) 802.15.4 frame. Addressing fields are
// present exactly as dictated by the FCF addressing-mode and PAN
// compression bits; extended (64-bit) addresses share the same optionals.
//
// operator== compares content identity (sfd, fcf, seq, addressing,
// payload); fcs, the corrupt flag and rss_dbm are derived/reception
// metadata and excluded.
struct Frame {
    std::uint8_t sfd = kSfd;
    std::uint16_t fcf = 0;
    std::uint8_t seq = 0;
    std::optional<std::uint16_t> dst_pan;
    std::optional<std::uint64_t> dst_addr;
    std::optional<std::uint16_t> src_pan;
    std::optional<std::uint64_t> src_addr;
    std::vector<std::uint8_t> payload;

    std::uint16_t fcs = 0;      // as decoded from the wire
    bool corrupt = false;       // FCS mismatch seen by decode_frame
    std::optional<double> rss_dbm; // observed RSS (reception metadata)

    FrameType type() const { return static_cast<FrameType>(fcf & 0x7); }
    AddrMode dst_mode() const { return static_cast<AddrMode>((fcf >> 10) & 0x3); }
    AddrMode src_mode() const { return static_cast<AddrMode>((fcf >> 14) & 0x3); }
    bool intra_pan() const { return (fcf >> 6) & 0x1; }

    // Logical source PAN: the src_pan bytes, or dst_pan under PAN
    // compression.
    std::optional<std::uint16_t> effective_src_pan() const;

    int mhr_len() const;
    int phy_len() const { return mhr_len() + static_cast<int>(payload.size()) + kFcsLen; }
    int total_bytes() const { return kShrPhrLen + phy_len(); }

    bool operator==(const Frame& other) const;
};

// Convenience constructors for the layouts the toolkit ships.
Frame ack_frame(std::uint8_t seq);
Frame intra_pan_data_frame(std::uint16_t pan, std::uint16_t dst_addr, std::uint16_t src_addr,
                           std::vector<std::uint8_t> payload, FrameType type = FrameType::data);

// A reference to a frame field, the external vocabulary for rule matches
// and offset queries. payload_byte carries a 0-based payload index.
struct FieldRef {
    enum class Kind {
        sfd,
        fcf,
        seq,
        dst_pan,
        dst_addr,
        src_pan,
        src_addr,
        frame_type,
        payload_byte,
        nw_ctrl,
        asl_cmd,
        rss,
    };

    Kind kind = Kind::fcf;
    int index = 0; // payload_byte only

    static FieldRef payload_byte(int index) { return FieldRef{Kind::payload_byte, index}; }
    static FieldRef of(Kind k) { return FieldRef{k, 0}; }

    // "sfd", "fcf", ..., "payload_byte:12"
    std::string name() const;
    static FieldRef parse(std::string_view name);

    bool operator==(const FieldRef&) const = default;
};

// Byte offset of the payload area within the whole frame: first payload
// byte sits at whole-frame offset payload_start_offset(f) (1-indexed).
int payload_start_offset(const Frame& layout);

// ZigBee probe positions inside the MAC payload (0-based): the 16-bit
// network-layer frame control at bytes 0-1, and the APS command
// identifier at byte 10 (8-byte NWK header + APS frame control + APS
// counter precede it).
inline constexpr int kNwCtrlPayloadIndex = 0;
inline constexpr int kAslCmdPayloadIndex = 10;

// ITU-T CRC-16 as used by the 802.15.4 FCS: polynomial
// x^16+x^12+x^5+1, zero initial value, bit-reflected. Table-driven.
std::uint16_t compute_fcs(std::span<const std::uint8_t> mpdu_without_fcs);

// Serializes SHR + SFD + PHR + MHR + payload + FCS. The FCS is
// recomputed; a stale frame.fcs is ignored. Throws ValidationError when
// addressing fields are inconsistent with the FCF or phy_len exceeds 127.
std::vector<std::uint8_t> encode_frame(const Frame& frame);

// Parses a whole frame (preamble first). Frames whose FCS does not match
// are returned with the corrupt flag set, not rejected. Throws ParseError
// (with 1-indexed byte offset) on truncation or a reserved
// addressing-mode combination.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Offset of the LAST byte of `field` (1-indexed over the whole frame,
// preamble byte = 1): the byte after which a rule on that field can
// fire. Throws ValidationError when the field is absent from this
// layout.
int field_offset(const Frame& layout, const FieldRef& field);

// Airtime at 32 us per byte (62.5 kbyte/s, 2 symbols of 16 us each).
double frame_airtime_us(int total_frame_bytes);

} // namespace airguard
