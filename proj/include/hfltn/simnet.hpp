#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hfltn/config.hpp"
#include "hfltn/datagen.hpp"
#include "hfltn/derms.hpp"
#include "hfltn/p2p.hpp"
#include "hfltn/parallel.hpp"
#include "hfltn/ring.hpp"
#include "hfltn/scheduler.hpp"
#include "hfltn/trainer.hpp"
#include "hfltn/wire.hpp"

namespace hfltn::simnet {

using scheduler::ClientId;
using scheduler::Round;

inline constexpr std::uint32_t kDermsNodeBase = 1'000'000;
inline constexpr std::uint32_t kEpdcNodeId = 2'000'000;

// 0.999 quantile of chi-square with 255 dof; a byte histogram of uniform
// shares stays below this with p > 0.001.
inline constexpr double kChiSquareCritical = 330.5197436340059;

struct RoundMetrics {
    Round epoch = 0;
    std::size_t active_clients = 0;
    std::uint64_t total_flops = 0;
    double sim_time_ms = 0.0;
    double per_epoch_diversity = 0.0;
    double cumulative_diversity = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double test_location_accuracy = 0.0;
    double test_time_mse = 0.0;
    double generalization_gap_pct = 0.0;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const RoundMetrics& m);

/// Per-run tally of what crossed the wire and which protocol paths ran.
/// The ablation matrix checks that each ablation moves exactly the
/// counters of its own path.
struct MessageCensus {
    std::uint64_t broadcast_msgs = 0;              // msg_type 1
    std::uint64_t p2p_share_msgs = 0;              // msg_type 0, EV -> EV
    std::uint64_t direct_share_msgs = 0;           // msg_type 0, raw shares EV -> DERMS
    std::uint64_t augmented_contribution_msgs = 0; // msg_type 0, augmented EV -> DERMS
    std::uint64_t plaintext_weight_msgs = 0;       // msg_type 0, secret sharing ablated
    std::uint64_t prediction_msgs = 0;             // msg_type 2
    std::uint64_t melsec_envelopes = 0;
    std::uint64_t tls13_envelopes = 0;
    std::uint64_t derms_reconstructions = 0;
    std::uint64_t normalize_rounds = 0;
    std::uint64_t total_scheduled = 0;  // sum of |C_t|
    std::map<p2p::Path, std::uint64_t> contributions_by_path;
};

/// Privacy posture of a finished run, evaluated over rounds where a
/// community received at least two contributions.
struct PrivacyReport {
    std::size_t derms_log_weight_matches = 0;  // exact-match hits in DERMS logs
    std::size_t peer_overexposure_events = 0;  // a peer saw >= K shares of one partition
    std::array<std::uint64_t, 256> byte_histogram{};
    std::uint64_t masked_elements = 0;  // ring elements behind the histogram
    std::vector<std::string> warnings;

    bool non_reconstruction_ok() const { return derms_log_weight_matches == 0; }
    bool peer_exposure_ok() const { return peer_overexposure_events == 0; }
    double chi_square_stat() const;
    bool uniformity_applicable() const { return masked_elements >= 100000; }
    bool uniformity_ok() const { return chi_square_stat() < kChiSquareCritical; }
};

struct ClientRuntime {
    datagen::EvProfile profile;
    int derms_community = 0;
    std::vector<trainer::TrainSample> train_samples;
    std::vector<trainer::TrainSample> val_samples;
    std::vector<trainer::TrainSample> test_samples;
    trainer::EvState final_state;
    std::vector<double> weights;  // W_i^t, refreshed by broadcast
    bool viable = false;          // has at least one training sample
};

struct CommunityRuntime {
    derms::GlobalModel model;
    derms::DermsAuditLog audit;
    std::vector<ClientId> members;
    std::vector<double> feature_summary;  // mean feature vector, most recent trips
};

/// Deterministic single-process runtime for the whole protocol: rotation,
/// broadcast, parallel local training, share exchange, secure aggregation,
/// normalization, prediction, EPDC ingestion. Every inter-node transfer is
/// serialized through the HFLS wire format; receivers see bytes only.
class World {
public:
    explicit World(config::ExperimentConfig cfg);

    RoundMetrics run_round();

    const config::ExperimentConfig& cfg() const { return cfg_; }
    const ring::FixedPointCodec& codec() const { return codec_; }
    const trainer::ModelLayout& layout() const { return layout_; }
    const trainer::TimeScaler& scaler() const { return scaler_; }
    const std::vector<ClientRuntime>& clients() const { return clients_; }
    const std::vector<CommunityRuntime>& communities() const { return communities_; }
    const MessageCensus& census() const { return census_; }
    const PrivacyReport& privacy() const { return privacy_; }
    const std::vector<derms::EpdcRecord>& epdc_records() const { return epdc_records_; }
    const std::map<int, derms::DemandProfile>& epdc_demand() const { return epdc_demand_; }

private:
    struct TrainOutcome {
        bool ok = false;
        std::vector<double> weights;
        ring::RingVector encoded;
    };

    void deliver(wire::Envelope env);
    void broadcast_weights(const std::vector<ClientId>& targets, Round t, double sim_ts);
    std::vector<TrainOutcome> train_active(const std::vector<ClientId>& active, Round t);

    config::ExperimentConfig cfg_;
    ring::FixedPointCodec codec_;
    trainer::ModelLayout layout_;
    trainer::TimeScaler scaler_;
    trainer::TrainOptions train_opts_;
    p2p::AugmentationConfig aug_cfg_;

    std::vector<ClientRuntime> clients_;
    std::vector<CommunityRuntime> communities_;
    std::unique_ptr<scheduler::RoundScheduler> scheduler_;
    p2p::PairingLedger pairing_ledger_;

    MessageCensus census_;
    PrivacyReport privacy_;
    std::vector<derms::EpdcRecord> epdc_records_;
    std::map<int, derms::DemandProfile> epdc_demand_;
    double sim_clock_ms_ = 0.0;

    // Inboxes for the current round; cleared each round. Raw frame bytes:
    // the serialization boundary between nodes.
    std::map<ClientId, std::vector<std::vector<std::uint8_t>>> peer_inbox_;
    std::map<int, std::vector<std::vector<std::uint8_t>>> derms_inbox_;
    std::map<ClientId, p2p::Path> round_paths_;
    std::map<ClientId, ring::SecretShare> retained_shares_;
};

struct ExperimentResult {
    std::vector<RoundMetrics> rounds;
    MessageCensus census;
    PrivacyReport privacy;
    std::map<int, derms::DemandProfile> epdc_demand;
    double loss_decrease_rate_pct = 0.0;
    double generalization_gap_pct = 0.0;
    std::string metrics_csv;
};

ExperimentResult run_experiment(const config::ExperimentConfig& cfg);

/// run_experiment plus the on-disk artifacts: metrics.csv, config.resolved,
/// per-community model blobs (HFLS global-weights frames), warnings.log.
ExperimentResult run_experiment_to_dir(const config::ExperimentConfig& cfg,
                                       const std::string& out_dir);

}  // namespace hfltn::simnet
