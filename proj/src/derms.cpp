#include "hfltn/derms.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace hfltn::derms {

std::uint64_t fingerprint(const ring::RingVector& rv) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xFFU;
            h *= 1099511628211ULL;
        }
    };
    mix(rv.dim());
    for (std::uint64_t e : rv.elems) mix(e);
    return h;
}

namespace {

void check_contributions(std::span<const p2p::Contribution> contributions,
                         std::size_t n_active) {
    if (contributions.empty() || n_active == 0) {
        throw EmptyRound("no contributions to aggregate");
    }
    if (contributions.size() != n_active) {
        throw EmptyRound("n_active " + std::to_string(n_active) + " != contributions " +
                         std::to_string(contributions.size()));
    }
    std::unordered_set<ClientId> seen;
    std::size_t dim = contributions.front().parts.front().dim();
    for (const auto& c : contributions) {
        if (!seen.insert(c.contributor_id).second) {
            throw DuplicateContributor("contributor " + std::to_string(c.contributor_id) +
                                       " appears twice");
        }
        if (c.parts.empty()) {
            throw EmptyRound("contribution without payload parts");
        }
        for (const auto& p : c.parts) {
            if (p.dim() != dim) {
                throw DimMismatch("contribution dim " + std::to_string(p.dim()) + " vs " +
                                  std::to_string(dim));
            }
        }
    }
}

}  // namespace

std::vector<double> secure_aggregate(std::span<const p2p::Contribution> contributions,
                                     std::size_t n_active, const ring::FixedPointCodec& codec,
                                     DermsAuditLog* log, Round round) {
    check_contributions(contributions, n_active);
    const std::size_t dim = contributions.front().parts.front().dim();
    ring::RingVector sum;
    sum.elems.assign(dim, 0);
    for (const auto& c : contributions) {
        for (const auto& p : c.parts) {
            if (log) log->record(round, DermsAuditLog::Kind::kReceivedPayload, c.contributor_id, p);
            ring::ring_add_in_place(sum, p);
        }
    }
    if (log) log->record(round, DermsAuditLog::Kind::kCommittedAggregate, 0, sum);
    auto theta = ring::decode_vector(sum, codec);
    const double inv = 1.0 / static_cast<double>(n_active);
    for (auto& v : theta) v *= inv;
    return theta;
}

std::vector<double> aggregate_reconstructing(std::span<const p2p::Contribution> contributions,
                                             std::size_t n_active,
                                             const ring::FixedPointCodec& codec,
                                             DermsAuditLog* log, Round round) {
    check_contributions(contributions, n_active);
    const std::size_t dim = contributions.front().parts.front().dim();
    std::vector<double> theta(dim, 0.0);
    const double inv = 1.0 / static_cast<double>(n_active);
    for (const auto& c : contributions) {
        ring::RingVector client_sum;
        client_sum.elems.assign(dim, 0);
        for (const auto& p : c.parts) {
            if (log) log->record(round, DermsAuditLog::Kind::kReceivedPayload, c.contributor_id, p);
            ring::ring_add_in_place(client_sum, p);
        }
        if (log) {
            log->record(round, DermsAuditLog::Kind::kReconstructedClient, c.contributor_id,
                        client_sum);
        }
        const auto vals = ring::decode_vector(client_sum, codec);
        for (std::size_t i = 0; i < dim; ++i) theta[i] += vals[i] * inv;
    }
    return theta;
}

std::vector<double> normalize(std::span<const double> theta, double tau) {
    if (tau <= 0.0) {
        throw NonFiniteInput("tau must be positive");
    }
    double sq = 0.0;
    for (double v : theta) {
        if (!std::isfinite(v)) {
            throw NonFiniteInput("non-finite coordinate in aggregate");
        }
        sq += v * v;
    }
    std::vector<double> out(theta.begin(), theta.end());
    double norm = std::sqrt(sq);
    // Rescale until the result itself satisfies the bound, so that applying
    // normalize twice is exactly the identity on the second pass (one extra
    // iteration at most, when rounding lands a hair outside the ball).
    while (norm > tau) {
        const double s = tau / norm;
        if (s >= 1.0) break;  // overshoot below representable precision
        sq = 0.0;
        for (auto& v : out) {
            v *= s;
            sq += v * v;
        }
        norm = std::sqrt(sq);
    }
    return out;
}

void commit_update(GlobalModel& model, std::vector<double> theta_norm) {
    for (double v : theta_norm) {
        if (!std::isfinite(v)) {
            throw NonFiniteInput("non-finite coordinate in committed update");
        }
    }
    model.theta = std::move(theta_norm);
    model.round += 1;
}

EpdcRecord emit_prediction(const GlobalModel& model, std::span<const double> community_features,
                           const trainer::ModelLayout& layout,
                           const trainer::TimeScaler& scaler) {
    if (model.round == 0 || model.theta.empty()) {
        throw UntrainedModel("prediction requested before any training round");
    }
    if (model.theta.size() != layout.dim()) {
        throw LayoutMismatch("model dim " + std::to_string(model.theta.size()) +
                             " vs layout " + std::to_string(layout.dim()));
    }
    const int nf = layout.feature_dim;
    int best = 0;
    double best_z = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < layout.n_locations; ++c) {
        double z = model.theta[layout.loc_bias(c)];
        const double* w = model.theta.data() + layout.loc_weight(c, 0);
        for (int f = 0; f < nf; ++f) z += w[f] * community_features[f];
        if (z > best_z) {
            best_z = z;
            best = c;
        }
    }
    double t_hat = model.theta[layout.time_bias()];
    const double* w = model.theta.data() + layout.time_weight(0);
    for (int f = 0; f < nf; ++f) t_hat += w[f] * community_features[f];

    EpdcRecord rec;
    rec.community_id = model.community_id;
    rec.predicted_location = best;
    rec.predicted_time = std::max(scaler.t_min, scaler.unscale(t_hat));
    rec.round = model.round;
    return rec;
}

std::map<int, DemandProfile> epdc_ingest(std::span<const EpdcRecord> records) {
    std::map<int, DemandProfile> demand;
    for (const auto& r : records) {
        auto& profile = demand[r.community_id];
        profile.location_counts[r.predicted_location] += 1;
        profile.hour_counts[static_cast<int>((r.predicted_time / 3600) % 24)] += 1;
    }
    return demand;
}

}  // namespace hfltn::derms
