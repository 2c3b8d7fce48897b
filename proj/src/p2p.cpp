#include "hfltn/p2p.hpp"

#include <algorithm>
#include <string>

namespace hfltn::p2p {

std::optional<PeerGroup> select_peers(ClientId owner, std::span<const RosterEntry> roster,
                                      Round t, const PairingLedger& ledger) {
    const RosterEntry* self = nullptr;
    for (const auto& e : roster) {
        if (e.id == owner) {
            self = &e;
            break;
        }
    }
    if (!self || self->transitory || !self->active) {
        return std::nullopt;
    }

    std::vector<ClientId> eligible;
    for (const auto& e : roster) {
        if (e.id == owner) continue;
        if (!e.active || e.transitory) continue;
        if (e.community != self->community) continue;
        eligible.push_back(e.id);
    }
    if (eligible.size() < kMinPeers) {
        return std::nullopt;
    }

    std::sort(eligible.begin(), eligible.end(), [&](ClientId a, ClientId b) {
        const auto la = ledger.last_paired(owner, a);
        const auto lb = ledger.last_paired(owner, b);
        if (la != lb) return la < lb;  // least recently paired first
        return a < b;
    });
    if (eligible.size() > kMaxPeers) {
        eligible.resize(kMaxPeers);
    }
    std::sort(eligible.begin(), eligible.end());

    PeerGroup g;
    g.owner_id = owner;
    g.members = std::move(eligible);
    g.formed_at_round = t;
    return g;
}

std::map<ClientId, ring::SecretShare> distribute_shares(
    std::span<const ring::SecretShare> shares, const PeerGroup& group) {
    if (shares.size() != group.members.size() + 1) {
        throw ShareCountMismatch("K=" + std::to_string(shares.size()) + " shares for " +
                                 std::to_string(group.members.size()) + " peers");
    }
    std::map<ClientId, ring::SecretShare> assignment;
    for (std::size_t i = 0; i < group.members.size(); ++i) {
        assignment.emplace(group.members[i], shares[i]);
    }
    return assignment;
}

Contribution augment(const ring::SecretShare& retained,
                     std::span<const ring::SecretShare> received,
                     const AugmentationConfig& cfg) {
    Contribution c;
    c.contributor_id = retained.sender_id;
    c.path = Path::kP2pAugmented;
    ring::RingVector acc = retained.payload;
    for (const auto& s : received) {
        if (s.payload.dim() != acc.dim()) {
            throw DimMismatch("augment: share dim " + std::to_string(s.payload.dim()) +
                              " vs " + std::to_string(acc.dim()));
        }
        if (cfg.alpha == 1.0) {
            ring::ring_add_in_place(acc, s.payload);
        } else {
            // Diagnostic path: scale in the real domain, then back to the ring.
            auto vals = ring::decode_vector(s.payload, cfg.codec);
            for (auto& v : vals) v *= cfg.alpha;
            ring::ring_add_in_place(acc, ring::encode_vector_unchecked(vals, cfg.codec));
        }
    }
    c.parts.push_back(std::move(acc));
    return c;
}

}  // namespace hfltn::p2p
