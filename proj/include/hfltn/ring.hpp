#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfltn/errors.hpp"
#include "hfltn/rng.hpp"

namespace hfltn::ring {

/// Fixed-point codec between real-valued weights and elements of Z_{2^64}.
/// A real x maps to round(x * 2^scale_bits), stored two's-complement, so
/// additive masking over the ring is exact. The headroom invariant
/// n_clients * w_max * 2^scale_bits < 2^63 keeps the true aggregate from
/// wrapping; callers validate it at configuration time.
struct FixedPointCodec {
    unsigned scale_bits = 32;
    double w_max = 1048576.0;  // 2^20

    double scale() const { return static_cast<double>(std::uint64_t{1} << scale_bits); }

    // Largest client count for which the no-wrap invariant holds.
    std::uint64_t max_clients() const;
};

/// A dense vector of ring elements; the unit of sharing and aggregation.
struct RingVector {
    std::vector<std::uint64_t> elems;

    std::size_t dim() const { return elems.size(); }
    bool operator==(const RingVector&) const = default;
};

/// One of K additive shares of a RingVector. The ring-sum of all K payloads
/// of a partition reconstructs the original exactly.
struct SecretShare {
    std::uint32_t sender_id = 0;
    std::uint16_t share_index = 0;
    std::uint16_t share_count = 0;
    RingVector payload;
};

RingVector encode_vector(std::span<const double> weights, const FixedPointCodec& codec);
std::vector<double> decode_vector(const RingVector& rv, const FixedPointCodec& codec);

// Unchecked variant for the alpha != 1 diagnostic path in p2p augmentation,
// where decoded share values legitimately exceed w_max.
RingVector encode_vector_unchecked(std::span<const double> weights, const FixedPointCodec& codec);

/// Splits rv into k additive shares: k-1 uniform ring vectors drawn from rng
/// and a final share fixed by the sum constraint.
std::vector<SecretShare> partition(const RingVector& rv, std::uint16_t k,
                                   std::uint32_t sender_id, Rng& rng);

/// Ring-sum of a complete share set. Refuses anything less than all K
/// distinct indices of a single partition.
RingVector reconstruct(std::span<const SecretShare> shares);

RingVector ring_add(const RingVector& a, const RingVector& b);
void ring_add_in_place(RingVector& acc, const RingVector& b);
RingVector ring_neg(const RingVector& a);

}  // namespace hfltn::ring
