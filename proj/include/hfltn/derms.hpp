#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hfltn/errors.hpp"
#include "hfltn/p2p.hpp"
#include "hfltn/ring.hpp"
#include "hfltn/trainer.hpp"

namespace hfltn::derms {

using scheduler::ClientId;
using scheduler::Round;

/// The community-level aggregate model: decoded real weights plus the round
/// counter. One instance per community; rounds are strictly sequential.
struct GlobalModel {
    std::vector<double> theta;
    Round round = 0;
    int community_id = 0;
};

struct EpdcRecord {
    int community_id = 0;
    int predicted_location = 0;       // community index in [0,77)
    std::int64_t predicted_time = 0;  // Unix seconds, >= dataset epoch start
    Round round = 0;
};

std::uint64_t fingerprint(const ring::RingVector& rv);

/// Audit trail of every ring vector the DERMS receives or materializes,
/// stored as 64-bit fingerprints. The honest-but-curious check scans this
/// log for exact matches against individual clients' encoded weights.
class DermsAuditLog {
public:
    enum class Kind : std::uint8_t {
        kReceivedPayload = 0,
        kCommittedAggregate = 1,
        kReconstructedClient = 2,
    };
    struct Entry {
        Round round;
        Kind kind;
        ClientId sender;
        std::size_t dim;
        std::uint64_t hash;
    };

    void record(Round t, Kind kind, ClientId sender, const ring::RingVector& rv) {
        entries_.push_back({t, kind, sender, rv.dim(), fingerprint(rv)});
    }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

/// Eq.-style secure aggregation: ring-sum every payload part of every
/// contribution, decode once, divide by the number of contributors. No
/// per-client vector is ever materialized on this path; the audit log keeps
/// only the received parts and the committed aggregate.
std::vector<double> secure_aggregate(std::span<const p2p::Contribution> contributions,
                                     std::size_t n_active, const ring::FixedPointCodec& codec,
                                     DermsAuditLog* log = nullptr, Round round = 0);

/// Ablation path ("secure aggregation removed"): reconstructs each client's
/// weights at the DERMS before averaging the decoded vectors. Expected to
/// violate the non-reconstruction invariant; kept for the ablation matrix.
std::vector<double> aggregate_reconstructing(std::span<const p2p::Contribution> contributions,
                                             std::size_t n_active,
                                             const ring::FixedPointCodec& codec,
                                             DermsAuditLog* log = nullptr, Round round = 0);

/// L2 clipping to radius tau: identity inside the ball, scaled to the
/// boundary outside.
std::vector<double> normalize(std::span<const double> theta, double tau);

/// Applies the normalized aggregate and advances the round counter. The
/// per-client fan-out of identical weight copies is the runtime's job.
void commit_update(GlobalModel& model, std::vector<double> theta_norm);

/// Forward pass of the community model on an aggregate feature summary.
/// Unrestricted argmax over the 77 areas (ties toward the lowest index);
/// predicted time floored at the dataset epoch start.
EpdcRecord emit_prediction(const GlobalModel& model, std::span<const double> community_features,
                           const trainer::ModelLayout& layout, const trainer::TimeScaler& scaler);

struct DemandProfile {
    std::map<int, std::uint64_t> location_counts;   // predicted location -> count
    std::map<int, std::uint64_t> hour_counts;       // hour of day (UTC) -> count
};

std::map<int, DemandProfile> epdc_ingest(std::span<const EpdcRecord> records);

}  // namespace hfltn::derms
