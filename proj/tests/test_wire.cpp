#include <doctest.h>

#include <cstring>
#include <vector>

#include "hfltn/rng.hpp"
#include "hfltn/wire.hpp"

using namespace hfltn;
using namespace hfltn::wire;

TEST_CASE("crc32 matches the standard check vector") {
    const char* s = "123456789";
    CHECK(crc32({reinterpret_cast<const std::uint8_t*>(s), 9}) == 0xCBF43926U);
    CHECK(crc32({}) == 0x00000000U);
}

TEST_CASE("share frame: hand-assembled byte layout") {
    // dim=1, payload=[5], sender=7, index=0, K=2; frozen from an independent
    // byte-layout oracle (header 18 + one u64 + crc32 = 30 bytes).
    ring::SecretShare share{7, 0, 2, {{5}}};
    const auto frame = serialize_share(share);
    const std::vector<std::uint8_t> expected = {
        0x48, 0x46, 0x4C, 0x53, 0x01, 0x00, 0x07, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x02, 0x00, 0x01, 0x00, 0x00, 0x00, 0x05, 0x00,
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x12, 0xB9, 0x24, 0xC5,
    };
    CHECK(frame == expected);
    CHECK(frame.size() == frame_size(1));
    // leading bytes: magic 48 46 4C 53, version 01, msg_type 00
    CHECK(std::memcmp(frame.data(), "HFLS", 4) == 0);
}

TEST_CASE("share round-trips are identity") {
    Rng rng(8);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 64);
    for (int i = 0; i < 1000; ++i) {
        ring::SecretShare s;
        s.sender_id = static_cast<std::uint32_t>(rng());
        s.share_count = static_cast<std::uint16_t>(2 + rng() % 10);
        s.share_index = static_cast<std::uint16_t>(rng() % s.share_count);
        s.payload.elems.resize(dim_dist(rng));
        for (auto& e : s.payload.elems) e = rng();
        const auto frame = serialize_share(s);
        const auto back = deserialize_share(frame);
        CHECK(back.sender_id == s.sender_id);
        CHECK(back.share_index == s.share_index);
        CHECK(back.share_count == s.share_count);
        CHECK(back.payload == s.payload);
    }
}

TEST_CASE("any single-bit corruption yields CrcMismatch") {
    ring::SecretShare share{1234, 1, 3, {{0xDEADBEEFCAFEF00DULL, 42}}};
    const auto frame = serialize_share(share);
    for (std::size_t byte = 0; byte < frame.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            auto corrupted = frame;
            corrupted[byte] ^= static_cast<std::uint8_t>(1U << bit);
            CHECK_THROWS_AS(decode_message(corrupted), CrcMismatch);
        }
    }
}

TEST_CASE("malformed frames: magic, version, truncation") {
    ring::SecretShare share{1, 0, 2, {{7}}};
    auto frame = serialize_share(share);

    // wrong magic but a recomputed, valid crc
    auto bad_magic = frame;
    bad_magic[0] = 'X';
    const auto body_len = bad_magic.size() - kCrcBytes;
    const std::uint32_t crc = crc32({bad_magic.data(), body_len});
    for (int i = 0; i < 4; ++i) {
        bad_magic[body_len + i] = static_cast<std::uint8_t>((crc >> (8 * i)) & 0xFF);
    }
    CHECK_THROWS_AS(decode_message(bad_magic), BadMagic);

    auto bad_version = frame;
    bad_version[4] = 0x02;
    const std::uint32_t crc2 = crc32({bad_version.data(), body_len});
    for (int i = 0; i < 4; ++i) {
        bad_version[body_len + i] = static_cast<std::uint8_t>((crc2 >> (8 * i)) & 0xFF);
    }
    CHECK_THROWS_AS(decode_message(bad_version), BadVersion);

    // below the minimum frame size: no crc field to even check
    CHECK_THROWS_AS(decode_message({frame.data(), 10}), Truncated);
    // a cut-off frame fails its crc (the crc is read from the received tail)
    auto cut = frame;
    cut.pop_back();
    CHECK_THROWS_AS(decode_message(cut), CrcMismatch);

    // authentic crc but inconsistent declared dim
    auto bad_dim = frame;
    bad_dim[14] = 0x02;  // declares dim 2, carries 1
    const std::uint32_t crc3 = crc32({bad_dim.data(), body_len});
    for (int i = 0; i < 4; ++i) {
        bad_dim[body_len + i] = static_cast<std::uint8_t>((crc3 >> (8 * i)) & 0xFF);
    }
    CHECK_THROWS_AS(decode_message(bad_dim), Truncated);
}

TEST_CASE("non-share frames decode but are refused by deserialize_share") {
    WireMessage msg;
    msg.msg_type = MsgType::kGlobalWeights;
    msg.sender_id = 1000000;
    msg.payload.elems = {1, 2, 3};
    const auto frame = encode_message(msg);
    CHECK(decode_message(frame) == msg);
    CHECK_THROWS_AS(deserialize_share(frame), UnexpectedMsgType);
}

TEST_CASE("envelope payloads are bytes, never references") {
    static_assert(std::is_same_v<decltype(Envelope::payload), std::vector<std::uint8_t>>);
    CHECK(true);
}
