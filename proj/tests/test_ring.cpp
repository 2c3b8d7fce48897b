#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "hfltn/ring.hpp"

using namespace hfltn;
using namespace hfltn::ring;

namespace {
const FixedPointCodec kCodec{};  // scale_bits=32, w_max=2^20
}

TEST_CASE("encode: frozen values") {
    // 1.0 * 2^32
    auto rv = encode_vector(std::array{1.0}, kCodec);
    CHECK(rv.elems == std::vector<std::uint64_t>{4294967296ULL});

    rv = encode_vector(std::array{0.0, 0.0}, kCodec);
    CHECK(rv.elems == std::vector<std::uint64_t>{0, 0});

    // two's complement of -2^32, frozen from a big-integer oracle:
    // 2^64 - 2^32 = 18446744069414584320
    rv = encode_vector(std::array{-1.0}, kCodec);
    CHECK(rv.elems == std::vector<std::uint64_t>{18446744069414584320ULL});
}

TEST_CASE("decode: frozen values") {
    CHECK(decode_vector({{4294967296ULL}}, kCodec) == std::vector<double>{1.0});
    CHECK(decode_vector({{18446744069414584320ULL}}, kCodec) == std::vector<double>{-1.0});
    CHECK(decode_vector({{0}}, kCodec) == std::vector<double>{0.0});
}

TEST_CASE("encode rejects out-of-range magnitudes") {
    CHECK_THROWS_AS(encode_vector(std::array{kCodec.w_max * 1.5}, kCodec), MagnitudeExceeded);
    CHECK_THROWS_AS(encode_vector(std::array{0.0, -kCodec.w_max - 1.0}, kCodec),
                    MagnitudeExceeded);
    CHECK_NOTHROW(encode_vector(std::array{kCodec.w_max, -kCodec.w_max}, kCodec));
}

TEST_CASE("codec round-trip error stays within half an encoding step") {
    Rng rng(11);
    std::uniform_real_distribution<double> dist(-kCodec.w_max, kCodec.w_max);
    const double bound = std::ldexp(1.0, -static_cast<int>(kCodec.scale_bits + 1));
    for (int i = 0; i < 20000; ++i) {
        const double x = dist(rng);
        const auto back = decode_vector(encode_vector(std::array{x}, kCodec), kCodec);
        CHECK(std::fabs(back[0] - x) <= bound);
    }
}

TEST_CASE("headroom invariant: client count limit") {
    // n * 2^20 * 2^32 < 2^63  =>  n <= 2047
    CHECK(kCodec.max_clients() == 2047);
    const FixedPointCodec small{16, 4.0};
    CHECK(small.max_clients() >= 1);
}

TEST_CASE("partition: forced last share and sum constraint") {
    Rng rng(42);
    const RingVector rv{{5}};
    const auto shares = partition(rv, 3, 9, rng);
    REQUIRE(shares.size() == 3);
    const std::uint64_t a = shares[0].payload.elems[0];
    const std::uint64_t b = shares[1].payload.elems[0];
    CHECK(shares[2].payload.elems[0] == std::uint64_t{5} - a - b);
    CHECK(a + b + shares[2].payload.elems[0] == 5);
    for (const auto& s : shares) {
        CHECK(s.sender_id == 9);
        CHECK(s.share_count == 3);
    }
}

TEST_CASE("partition of the zero vector gives negated pairs at k=2") {
    Rng rng(1);
    const RingVector rv{{0, 0}};
    const auto shares = partition(rv, 2, 0, rng);
    CHECK(shares[1].payload == ring_neg(shares[0].payload));
}

TEST_CASE("partition rejects k < 2") {
    Rng rng(3);
    CHECK_THROWS_AS(partition(RingVector{{1}}, 1, 0, rng), InvalidShareCount);
    CHECK_THROWS_AS(partition(RingVector{{1}}, 0, 0, rng), InvalidShareCount);
}

TEST_CASE("reconstruct(partition(rv)) is bit-exact over random vectors") {
    Rng rng(777);
    std::uniform_int_distribution<std::size_t> dim_dist(1, 1024);
    std::uniform_int_distribution<int> k_dist(2, 11);
    for (int trial = 0; trial < 10000; ++trial) {
        RingVector rv;
        rv.elems.resize(dim_dist(rng));
        for (auto& e : rv.elems) e = rng();
        const auto k = static_cast<std::uint16_t>(k_dist(rng));
        const auto shares = partition(rv, k, 1, rng);
        CHECK(reconstruct(shares) == rv);
    }
}

TEST_CASE("reconstruct refuses an incomplete share set") {
    Rng rng(5);
    const RingVector rv{{123, 456}};
    auto shares = partition(rv, 2, 0, rng);
    shares.pop_back();
    CHECK_THROWS_AS(reconstruct(shares), IncompleteShareSet);

    auto three = partition(rv, 3, 0, rng);
    three.erase(three.begin() + 1);
    CHECK_THROWS_AS(reconstruct(three), IncompleteShareSet);

    // duplicated index does not substitute for the missing one
    auto dup = partition(rv, 3, 0, rng);
    dup[1] = dup[0];
    CHECK_THROWS_AS(reconstruct(dup), IncompleteShareSet);
}

TEST_CASE("ring_add basics") {
    CHECK(ring_add({{1}}, {{2}}) == RingVector{{3}});
    CHECK(ring_add({{0xFFFFFFFFFFFFFFFFULL}}, {{1}}) == RingVector{{0}});
    CHECK(ring_add({{42}}, {{0}}) == RingVector{{42}});
    CHECK_THROWS_AS(ring_add({{1, 2}}, {{1}}), DimMismatch);
}

TEST_CASE("ring addition is associative and commutative on random data") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        RingVector a, b, c;
        a.elems = {rng(), rng(), rng()};
        b.elems = {rng(), rng(), rng()};
        c.elems = {rng(), rng(), rng()};
        CHECK(ring_add(a, b) == ring_add(b, a));
        CHECK(ring_add(ring_add(a, b), c) == ring_add(a, ring_add(b, c)));
    }
}

TEST_CASE("sharing is additively homomorphic") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        RingVector u, v;
        u.elems = {rng(), rng(), rng(), rng()};
        v.elems = {rng(), rng(), rng(), rng()};
        auto su = partition(u, 4, 0, rng);
        const auto sv = partition(v, 4, 1, rng);
        for (std::size_t i = 0; i < su.size(); ++i) {
            su[i].payload = ring_add(su[i].payload, sv[i].payload);
        }
        CHECK(reconstruct(su) == ring_add(u, v));
    }
}

TEST_CASE("share bytes are uniform: chi-square over >= 1e5 elements") {
    Rng rng(31337);
    RingVector rv;
    rv.elems.resize(50000);
    std::uniform_real_distribution<double> w(-5.0, 5.0);
    std::vector<double> vals(rv.dim());
    for (auto& v : vals) v = w(rng);
    rv = encode_vector(vals, kCodec);

    std::array<std::uint64_t, 256> hist{};
    const auto shares = partition(rv, 3, 0, rng);  // 150000 elements total
    std::uint64_t elems = 0;
    for (const auto& s : shares) {
        for (std::uint64_t e : s.payload.elems) {
            for (int b = 0; b < 8; ++b) hist[(e >> (8 * b)) & 0xFF] += 1;
        }
        elems += s.payload.dim();
    }
    REQUIRE(elems >= 100000);
    const double expected = static_cast<double>(elems) * 8.0 / 256.0;
    double stat = 0.0;
    for (auto c : hist) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    // 0.999 quantile of chi-square with 255 dof
    CHECK(stat < 330.5197436340059);
}
