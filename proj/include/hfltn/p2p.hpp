#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "hfltn/errors.hpp"
#include "hfltn/ring.hpp"
#include "hfltn/scheduler.hpp"

namespace hfltn::p2p {

using scheduler::ClientId;
using scheduler::Round;

inline constexpr std::size_t kMinPeers = 2;
inline constexpr std::size_t kMaxPeers = 10;

struct PeerGroup {
    ClientId owner_id = 0;
    std::vector<ClientId> members;  // ascending, 2..10 ids, never the owner
    Round formed_at_round = 0;
};

struct AugmentationConfig {
    double alpha = 1.0;
    // Codec for the alpha != 1 diagnostic path, where received shares are
    // decoded, scaled, and re-encoded. alpha = 1 stays pure ring arithmetic
    // and is the only aggregate-preserving setting.
    ring::FixedPointCodec codec;
};

enum class Path : std::uint8_t {
    kP2pAugmented = 0,
    kDirectFallback = 1,
    kTransitoryDirect = 2,
};

/// What one EV hands its DERMS in a round. The P2P path produces a single
/// masked payload (retained share plus everything received); the direct
/// paths keep the K raw shares as separate parts so that each travels in
/// its own wire message and no single message carries the full weights.
struct Contribution {
    ClientId contributor_id = 0;
    Path path = Path::kP2pAugmented;
    std::vector<ring::RingVector> parts;
};

/// Per-round view of one client as the peer selector sees it.
struct RosterEntry {
    ClientId id = 0;
    int community = 0;
    bool transitory = false;
    bool active = false;
};

/// Remembers when each (owner, peer) pairing last happened so selection can
/// prefer the least-recently-paired peers and rotate through large
/// communities.
class PairingLedger {
public:
    static constexpr std::int64_t kNever = -1;

    std::int64_t last_paired(ClientId owner, ClientId peer) const {
        auto it = last_.find({owner, peer});
        return it == last_.end() ? kNever : it->second;
    }

    void record(ClientId owner, std::span<const ClientId> members, Round t) {
        for (ClientId m : members) {
            last_[{owner, m}] = static_cast<std::int64_t>(t);
        }
    }

private:
    std::map<std::pair<ClientId, ClientId>, std::int64_t> last_;
};

/// Picks 2-10 peers for a non-transitory owner from the active,
/// non-transitory clients of its own community, preferring the
/// least-recently-paired (ties toward ascending id). Returns nullopt when
/// fewer than two peers are eligible; the owner then submits its shares
/// directly to the DERMS.
std::optional<PeerGroup> select_peers(ClientId owner, std::span<const RosterEntry> roster,
                                      Round t, const PairingLedger& ledger);

/// Assigns shares 0..K-2 to the group members in ascending-id order; the
/// owner retains share K-1 by convention. Requires K == |members| + 1.
std::map<ClientId, ring::SecretShare> distribute_shares(
    std::span<const ring::SecretShare> shares, const PeerGroup& group);

Contribution augment(const ring::SecretShare& retained,
                     std::span<const ring::SecretShare> received,
                     const AugmentationConfig& cfg);

}  // namespace hfltn::p2p
