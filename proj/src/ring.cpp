#include "hfltn/ring.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace hfltn::ring {

std::uint64_t FixedPointCodec::max_clients() const {
    // n * w_max * 2^scale_bits < 2^63
    const double limit = std::ldexp(1.0, 63);
    const double per_client = w_max * scale();
    if (per_client <= 0.0) return 0;
    auto n = static_cast<std::uint64_t>(limit / per_client);
    while (static_cast<double>(n) * per_client >= limit && n > 0) --n;
    return n;
}

RingVector encode_vector(std::span<const double> weights, const FixedPointCodec& codec) {
    for (double w : weights) {
        if (!(std::fabs(w) <= codec.w_max)) {
            throw MagnitudeExceeded("weight magnitude " + std::to_string(w) +
                                    " exceeds w_max " + std::to_string(codec.w_max));
        }
    }
    return encode_vector_unchecked(weights, codec);
}

RingVector encode_vector_unchecked(std::span<const double> weights, const FixedPointCodec& codec) {
    RingVector rv;
    rv.elems.resize(weights.size());
    const double s = codec.scale();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        // llround gives round-half-away-from-zero; two's complement wraps the
        // signed value into Z_{2^64}.
        const auto q = static_cast<std::int64_t>(std::llround(weights[i] * s));
        rv.elems[i] = static_cast<std::uint64_t>(q);
    }
    return rv;
}

std::vector<double> decode_vector(const RingVector& rv, const FixedPointCodec& codec) {
    std::vector<double> out(rv.dim());
    const double inv = 1.0 / codec.scale();
    for (std::size_t i = 0; i < rv.dim(); ++i) {
        // Elements >= 2^63 are negative in two's complement.
        out[i] = static_cast<double>(static_cast<std::int64_t>(rv.elems[i])) * inv;
    }
    return out;
}

std::vector<SecretShare> partition(const RingVector& rv, std::uint16_t k,
                                   std::uint32_t sender_id, Rng& rng) {
    if (k < 2) {
        throw InvalidShareCount("share count must be >= 2, got " + std::to_string(k));
    }
    std::vector<SecretShare> shares(k);
    RingVector running;
    running.elems.assign(rv.dim(), 0);
    for (std::uint16_t i = 0; i + 1 < k; ++i) {
        shares[i].sender_id = sender_id;
        shares[i].share_index = i;
        shares[i].share_count = k;
        shares[i].payload.elems.resize(rv.dim());
        for (std::size_t j = 0; j < rv.dim(); ++j) {
            const std::uint64_t r = rng();
            shares[i].payload.elems[j] = r;
            running.elems[j] += r;
        }
    }
    auto& last = shares[k - 1];
    last.sender_id = sender_id;
    last.share_index = static_cast<std::uint16_t>(k - 1);
    last.share_count = k;
    last.payload.elems.resize(rv.dim());
    for (std::size_t j = 0; j < rv.dim(); ++j) {
        last.payload.elems[j] = rv.elems[j] - running.elems[j];
    }
    return shares;
}

RingVector reconstruct(std::span<const SecretShare> shares) {
    if (shares.empty()) {
        throw IncompleteShareSet("no shares given");
    }
    const std::uint16_t k = shares.front().share_count;
    const std::size_t dim = shares.front().payload.dim();
    std::vector<bool> seen(k, false);
    std::size_t distinct = 0;
    for (const auto& s : shares) {
        if (s.share_count != k) {
            throw IncompleteShareSet("mixed share_count in share set");
        }
        if (s.payload.dim() != dim) {
            throw DimMismatch("share dim mismatch");
        }
        if (s.share_index >= k) {
            throw IncompleteShareSet("share_index out of range");
        }
        if (!seen[s.share_index]) {
            seen[s.share_index] = true;
            ++distinct;
        }
    }
    if (distinct != k) {
        throw IncompleteShareSet("have " + std::to_string(distinct) + " of " +
                                 std::to_string(k) + " share indices");
    }
    RingVector out;
    out.elems.assign(dim, 0);
    for (const auto& s : shares) {
        for (std::size_t j = 0; j < dim; ++j) {
            out.elems[j] += s.payload.elems[j];
        }
    }
    return out;
}

RingVector ring_add(const RingVector& a, const RingVector& b) {
    if (a.dim() != b.dim()) {
        throw DimMismatch("ring_add: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
    }
    RingVector out = a;
    for (std::size_t i = 0; i < out.dim(); ++i) {
        out.elems[i] += b.elems[i];
    }
    return out;
}

void ring_add_in_place(RingVector& acc, const RingVector& b) {
    if (acc.dim() != b.dim()) {
        throw DimMismatch("ring_add_in_place: " + std::to_string(acc.dim()) + " vs " +
                          std::to_string(b.dim()));
    }
    for (std::size_t i = 0; i < acc.dim(); ++i) {
        acc.elems[i] += b.elems[i];
    }
}

RingVector ring_neg(const RingVector& a) {
    RingVector out = a;
    for (auto& e : out.elems) {
        e = 0U - e;
    }
    return out;
}

}  // namespace hfltn::ring
