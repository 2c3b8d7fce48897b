#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfltn/errors.hpp"
#include "hfltn/ring.hpp"

namespace hfltn::wire {

// HFLS binary frame, little-endian throughout:
//   magic "HFLS" | version 0x01 | msg_type | sender_id u32 | share_index u16
//   | share_count u16 | dim u32 | dim x u64 payload | crc32 u32
// The CRC (poly 0xEDB88320, reflected) covers every preceding byte and is
// verified before anything else, so any single-bit corruption surfaces as
// CrcMismatch rather than a misleading magic/version error.

inline constexpr std::uint8_t kMagic[4] = {0x48, 0x46, 0x4C, 0x53};
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderBytes = 18;  // magic..dim inclusive
inline constexpr std::size_t kCrcBytes = 4;

enum class MsgType : std::uint8_t {
    kShare = 0,
    kGlobalWeights = 1,
    kPrediction = 2,
};

struct WireMessage {
    MsgType msg_type = MsgType::kShare;
    std::uint32_t sender_id = 0;
    std::uint16_t share_index = 0;
    std::uint16_t share_count = 0;
    ring::RingVector payload;

    bool operator==(const WireMessage&) const = default;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);

std::vector<std::uint8_t> encode_message(const WireMessage& msg);
WireMessage decode_message(std::span<const std::uint8_t> bytes);

// Share-specific wrappers used by the protocol layer.
std::vector<std::uint8_t> serialize_share(const ring::SecretShare& share);
ring::SecretShare deserialize_share(std::span<const std::uint8_t> bytes);

inline std::size_t frame_size(std::size_t dim) {
    return kHeaderBytes + dim * 8 + kCrcBytes;
}

/// Simulated secure channel kinds. EV<->EV and EV<->DERMS traffic rides
/// MELSEC_SIM; DERMS<->EPDC traffic rides TLS13_SIM. The channels model
/// authenticated, confidential, in-order delivery; no real cryptography.
enum class ChannelKind : std::uint8_t {
    kMelsecSim = 0,
    kTls13Sim = 1,
};

/// The only thing that crosses a node boundary: serialized bytes plus
/// routing metadata. Receivers reconstruct state from payload alone.
struct Envelope {
    ChannelKind channel_kind = ChannelKind::kMelsecSim;
    std::uint32_t sender = 0;
    std::uint32_t receiver = 0;
    std::vector<std::uint8_t> payload;
    double sim_timestamp = 0.0;
};

}  // namespace hfltn::wire
