#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "hfltn/derms.hpp"

using namespace hfltn;
using namespace hfltn::derms;

namespace {

const ring::FixedPointCodec kCodec{};

// Full P2P exchange for a set of plaintext weight vectors: every client
// partitions, disperses, and augments. Returns one contribution per client.
std::vector<p2p::Contribution> full_exchange(const std::vector<std::vector<double>>& weights,
                                             Rng& rng) {
    const auto n = static_cast<ClientId>(weights.size());
    std::map<ClientId, std::vector<ring::SecretShare>> inbox;
    std::map<ClientId, ring::SecretShare> retained;
    for (ClientId owner = 0; owner < n; ++owner) {
        const auto enc = ring::encode_vector(weights[owner], kCodec);
        const auto shares = ring::partition(enc, static_cast<std::uint16_t>(n), owner, rng);
        p2p::PeerGroup g{owner, {}, 0};
        for (ClientId peer = 0; peer < n; ++peer) {
            if (peer != owner) g.members.push_back(peer);
        }
        for (const auto& [peer, share] : p2p::distribute_shares(shares, g)) {
            inbox[peer].push_back(share);
        }
        retained.emplace(owner, shares[n - 1]);
    }
    std::vector<p2p::Contribution> contributions;
    const p2p::AugmentationConfig cfg{1.0, kCodec};
    for (ClientId owner = 0; owner < n; ++owner) {
        contributions.push_back(p2p::augment(retained.at(owner), inbox.at(owner), cfg));
    }
    return contributions;
}

}  // namespace

TEST_CASE("secure aggregation matches the plaintext-averaging oracle") {
    Rng rng(55);
    const std::vector<std::vector<double>> weights = {
        {0.5, -1.25, 3.0, 0.0}, {2.25, 0.0, -0.75, 1.0}, {-4.5, 1.5, 0.125, -2.0}};
    const auto contributions = full_exchange(weights, rng);

    DermsAuditLog log;
    const auto theta = secure_aggregate(contributions, 3, kCodec, &log, 0);

    const double tol = 3.0 * std::ldexp(1.0, -32);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double expected = (weights[0][i] + weights[1][i] + weights[2][i]) / 3.0;
        CHECK(std::fabs(theta[i] - expected) <= tol);
    }

    // honest-but-curious: nothing in the log equals a client's encoded weights
    for (const auto& w : weights) {
        const auto print = fingerprint(ring::encode_vector(w, kCodec));
        for (const auto& e : log.entries()) {
            CHECK(e.hash != print);
        }
    }
}

TEST_CASE("single transitory contributor: the privacy-floor average is its own model") {
    Rng rng(6);
    const std::vector<double> w = {1.5, -0.25};
    const auto enc = ring::encode_vector(w, kCodec);
    const auto shares = ring::partition(enc, 3, 7, rng);
    p2p::Contribution c{7, p2p::Path::kTransitoryDirect, {}};
    for (const auto& s : shares) c.parts.push_back(s.payload);

    const auto theta = secure_aggregate(std::vector{c}, 1, kCodec, nullptr, 0);
    CHECK(theta[0] == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(theta[1] == doctest::Approx(-0.25).epsilon(1e-9));
}

TEST_CASE("aggregation input validation") {
    p2p::Contribution a{0, p2p::Path::kP2pAugmented, {ring::RingVector{{1, 2}}}};
    p2p::Contribution dup{0, p2p::Path::kP2pAugmented, {ring::RingVector{{3, 4}}}};
    p2p::Contribution narrow{1, p2p::Path::kP2pAugmented, {ring::RingVector{{3}}}};

    CHECK_THROWS_AS(secure_aggregate({}, 0, kCodec), EmptyRound);
    CHECK_THROWS_AS(secure_aggregate(std::vector{a, dup}, 2, kCodec), DuplicateContributor);
    CHECK_THROWS_AS(secure_aggregate(std::vector{a, narrow}, 2, kCodec), DimMismatch);
}

TEST_CASE("reconstructing aggregation exposes per-client vectors in the log") {
    Rng rng(14);
    const std::vector<std::vector<double>> weights = {{1.0, 2.0}, {3.0, -1.0}};
    std::vector<p2p::Contribution> contributions;
    for (ClientId id = 0; id < 2; ++id) {
        const auto enc = ring::encode_vector(weights[id], kCodec);
        const auto shares = ring::partition(enc, 3, id, rng);
        p2p::Contribution c{id, p2p::Path::kTransitoryDirect, {}};
        for (const auto& s : shares) c.parts.push_back(s.payload);
        contributions.push_back(std::move(c));
    }
    DermsAuditLog log;
    const auto theta = aggregate_reconstructing(contributions, 2, kCodec, &log, 0);
    CHECK(theta[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(theta[1] == doctest::Approx(0.5).epsilon(1e-9));

    std::size_t matches = 0;
    for (const auto& w : weights) {
        const auto print = fingerprint(ring::encode_vector(w, kCodec));
        for (const auto& e : log.entries()) {
            if (e.hash == print) ++matches;
        }
    }
    CHECK(matches == 2);  // both clients reconstructed: the invariant fails by design
}

TEST_CASE("normalize: L2 clipping") {
    const std::vector<double> small = {0.3, 0.4};  // norm 0.5
    CHECK(normalize(small, 1.0) == small);

    const auto clipped = normalize(std::vector<double>{3.0, 4.0}, 1.0);
    CHECK(clipped[0] == doctest::Approx(0.6));
    CHECK(clipped[1] == doctest::Approx(0.8));

    CHECK_THROWS_AS(normalize(std::vector<double>{std::nan("")}, 1.0), NonFiniteInput);
    CHECK_THROWS_AS(normalize(small, 0.0), NonFiniteInput);
}

TEST_CASE("normalize is idempotent") {
    Rng rng(33);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(8);
        for (auto& x : v) x = d(rng);
        const auto once = normalize(v, 10.0);
        CHECK(normalize(once, 10.0) == once);
    }
}

TEST_CASE("normalization blunts a poisoned client") {
    // one client submits 100x weights; with clipping the aggregate stays far
    // closer to the honest mean
    const std::vector<double> honest = {0.5, -0.5, 1.0};
    std::vector<double> agg(3), poisoned(3);
    for (int i = 0; i < 3; ++i) {
        poisoned[i] = honest[i] * 100.0;
        agg[i] = (3.0 * honest[i] + poisoned[i]) / 4.0;
    }
    const auto with_norm = normalize(agg, 2.0);
    double dist_norm = 0, dist_raw = 0;
    for (int i = 0; i < 3; ++i) {
        dist_norm += std::pow(with_norm[i] - honest[i], 2);
        dist_raw += std::pow(agg[i] - honest[i], 2);
    }
    CHECK(dist_norm < dist_raw);
}

TEST_CASE("emit_prediction: untrained model refused, zero weights hit the floor") {
    const trainer::ModelLayout layout{datagen::kCommunityAreas, trainer::kFeatureDim};
    const trainer::TimeScaler scaler{1672531200, 1704067200};
    std::vector<double> features(trainer::kFeatureDim, 0.25);

    GlobalModel untrained;
    untrained.theta.assign(layout.dim(), 0.0);
    untrained.round = 0;
    CHECK_THROWS_AS(emit_prediction(untrained, features, layout, scaler), UntrainedModel);

    GlobalModel zero = untrained;
    zero.round = 1;
    const auto rec = emit_prediction(zero, features, layout, scaler);
    CHECK(rec.predicted_location == 0);          // argmax tie-break: lowest index
    CHECK(rec.predicted_time == scaler.t_min);   // bias term is zero
    CHECK(rec.round == 1);
}

TEST_CASE("emit_prediction matches a direct forward-pass oracle") {
    const trainer::ModelLayout layout{datagen::kCommunityAreas, trainer::kFeatureDim};
    const trainer::TimeScaler scaler{1672531200, 1704067200};
    Rng rng(2);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    GlobalModel model;
    model.theta.resize(layout.dim());
    for (auto& v : model.theta) v = d(rng);
    model.round = 3;
    model.community_id = 1;

    std::vector<double> features(trainer::kFeatureDim);
    for (auto& v : features) v = d(rng);

    // oracle: evaluate both heads directly
    int best = 0;
    double best_z = -1e300;
    for (int c = 0; c < layout.n_locations; ++c) {
        double z = model.theta[layout.loc_bias(c)];
        for (int f = 0; f < layout.feature_dim; ++f) {
            z += model.theta[layout.loc_weight(c, f)] * features[f];
        }
        if (z > best_z) {
            best_z = z;
            best = c;
        }
    }
    double t_hat = model.theta[layout.time_bias()];
    for (int f = 0; f < layout.feature_dim; ++f) {
        t_hat += model.theta[layout.time_weight(f)] * features[f];
    }

    const auto rec = emit_prediction(model, features, layout, scaler);
    CHECK(rec.predicted_location == best);
    CHECK(rec.predicted_time == std::max(scaler.t_min, scaler.unscale(t_hat)));
    CHECK(rec.community_id == 1);
}

TEST_CASE("epdc_ingest: counting oracle") {
    CHECK(epdc_ingest({}).empty());

    std::vector<EpdcRecord> three(3);
    for (auto& r : three) {
        r.community_id = 0;
        r.predicted_location = 7;
        r.predicted_time = 1672531200;
    }
    const auto demand = epdc_ingest(three);
    CHECK(demand.at(0).location_counts.at(7) == 3);

    Rng rng(77);
    std::vector<EpdcRecord> mixed(100);
    for (auto& r : mixed) {
        r.community_id = static_cast<int>(rng() % 3);
        r.predicted_location = static_cast<int>(rng() % datagen::kCommunityAreas);
        r.predicted_time = 1672531200 + static_cast<std::int64_t>(rng() % 86400);
    }
    const auto big = epdc_ingest(mixed);
    std::uint64_t loc_total = 0, hour_total = 0;
    for (const auto& [community, profile] : big) {
        for (const auto& [loc, count] : profile.location_counts) loc_total += count;
        for (const auto& [hour, count] : profile.hour_counts) {
            CHECK(hour >= 0);
            CHECK(hour < 24);
            hour_total += count;
        }
    }
    CHECK(loc_total == 100);
    CHECK(hour_total == 100);
}

TEST_CASE("commit_update advances the round and installs the weights") {
    GlobalModel m;
    m.theta.assign(4, 0.0);
    commit_update(m, {1.0, 2.0, 3.0, 4.0});
    CHECK(m.round == 1);
    CHECK(m.theta == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(commit_update(m, {std::nan("")}), NonFiniteInput);
}
