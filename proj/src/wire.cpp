#include "hfltn/wire.hpp"

#include <array>
#include <cstring>
#include <string>

namespace hfltn::wire {

namespace {

std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) {
            c = (c & 1) ? (0xEDB88320U ^ (c >> 1)) : (c >> 1);
        }
        table[i] = c;
    }
    return table;
}

const std::array<std::uint32_t, 256> kCrcTable = make_crc_table();

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (std::uint16_t{p[1]} << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    std::uint32_t c = 0xFFFFFFFFU;
    for (std::uint8_t b : data) {
        c = kCrcTable[(c ^ b) & 0xFFU] ^ (c >> 8);
    }
    return c ^ 0xFFFFFFFFU;
}

std::vector<std::uint8_t> encode_message(const WireMessage& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(frame_size(msg.payload.dim()));
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(msg.msg_type));
    put_u32(out, msg.sender_id);
    put_u16(out, msg.share_index);
    put_u16(out, msg.share_count);
    put_u32(out, static_cast<std::uint32_t>(msg.payload.dim()));
    for (std::uint64_t e : msg.payload.elems) {
        put_u64(out, e);
    }
    put_u32(out, crc32(out));
    return out;
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes + kCrcBytes) {
        throw Truncated("frame of " + std::to_string(bytes.size()) + " bytes is too short");
    }
    // The CRC occupies the last four bytes of the frame and is verified
    // before any field is trusted, so corruption anywhere (including in the
    // dim field) surfaces as CrcMismatch.
    const auto body = bytes.first(bytes.size() - kCrcBytes);
    const std::uint32_t stored = get_u32(bytes.data() + bytes.size() - kCrcBytes);
    if (crc32(body) != stored) {
        throw CrcMismatch("crc check failed");
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw BadMagic("bad magic");
    }
    if (bytes[4] != kVersion) {
        throw BadVersion("unsupported version " + std::to_string(bytes[4]));
    }
    const std::uint8_t t = bytes[5];
    if (t > 2) {
        throw UnexpectedMsgType("unknown msg_type " + std::to_string(t));
    }
    const std::uint32_t dim = get_u32(bytes.data() + 14);
    if (frame_size(dim) != bytes.size()) {
        throw Truncated("frame declares dim " + std::to_string(dim) + " (" +
                        std::to_string(frame_size(dim)) + " bytes) but carries " +
                        std::to_string(bytes.size()));
    }
    WireMessage msg;
    msg.msg_type = static_cast<MsgType>(t);
    msg.sender_id = get_u32(bytes.data() + 6);
    msg.share_index = get_u16(bytes.data() + 10);
    msg.share_count = get_u16(bytes.data() + 12);
    msg.payload.elems.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        msg.payload.elems[i] = get_u64(bytes.data() + kHeaderBytes + 8 * std::size_t{i});
    }
    return msg;
}

std::vector<std::uint8_t> serialize_share(const ring::SecretShare& share) {
    WireMessage msg;
    msg.msg_type = MsgType::kShare;
    msg.sender_id = share.sender_id;
    msg.share_index = share.share_index;
    msg.share_count = share.share_count;
    msg.payload = share.payload;
    return encode_message(msg);
}

ring::SecretShare deserialize_share(std::span<const std::uint8_t> bytes) {
    WireMessage msg = decode_message(bytes);
    if (msg.msg_type != MsgType::kShare) {
        throw UnexpectedMsgType("expected share frame, got msg_type " +
                                std::to_string(static_cast<int>(msg.msg_type)));
    }
    ring::SecretShare share;
    share.sender_id = msg.sender_id;
    share.share_index = msg.share_index;
    share.share_count = msg.share_count;
    share.payload = std::move(msg.payload);
    return share;
}

}  // namespace hfltn::wire
