#include "hfltn/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace hfltn::simnet {

namespace {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

int node_class(std::uint32_t id) {
    if (id < kDermsNodeBase) return 0;  // EV
    if (id < kEpdcNodeId) return 1;     // DERMS
    return 2;                           // EPDC
}

}  // namespace

std::string metrics_csv_header() {
    return "epoch,active_clients,total_flops,sim_time_ms,per_epoch_diversity,"
           "cumulative_diversity,train_loss,val_loss,test_location_accuracy,"
           "test_time_mse,generalization_gap_pct";
}

std::string metrics_csv_row(const RoundMetrics& m) {
    std::ostringstream os;
    os << m.epoch << ',' << m.active_clients << ',' << m.total_flops << ','
       << fmt_real(m.sim_time_ms) << ',' << fmt_real(m.per_epoch_diversity) << ','
       << fmt_real(m.cumulative_diversity) << ',' << fmt_real(m.train_loss) << ','
       << fmt_real(m.val_loss) << ',' << fmt_real(m.test_location_accuracy) << ','
       << fmt_real(m.test_time_mse) << ',' << fmt_real(m.generalization_gap_pct);
    return os.str();
}

double PrivacyReport::chi_square_stat() const {
    std::uint64_t total = 0;
    for (auto c : byte_histogram) total += c;
    if (total == 0) return 0.0;
    const double expected = static_cast<double>(total) / 256.0;
    double stat = 0.0;
    for (auto c : byte_histogram) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

World::World(config::ExperimentConfig cfg) : cfg_(std::move(cfg)) {
    codec_ = ring::FixedPointCodec{cfg_.scale_bits, cfg_.w_max};
    layout_ = trainer::ModelLayout{datagen::kCommunityAreas, trainer::kFeatureDim};

    datagen::GenConfig gen;
    gen.days = static_cast<int>(cfg_.days);
    gen.trips_per_day = cfg_.trips_per_day;
    gen.mean_trip_km = cfg_.mean_trip_km;
    gen.transitory_fraction = cfg_.transitory_fraction;
    scaler_ = trainer::TimeScaler{gen.epoch_start, gen.window_end()};

    train_opts_.epochs = cfg_.local_epochs;
    train_opts_.learning_rate = cfg_.learning_rate;
    train_opts_.lambda_time = cfg_.lambda_time;
    train_opts_.w_max = cfg_.w_max;
    aug_cfg_ = p2p::AugmentationConfig{cfg_.alpha, codec_};

    auto fleet = datagen::generate_fleet(cfg_.n_evs, cfg_.seed, gen);
    clients_.resize(fleet.size());
    const auto mode = cfg_.parallel ? ExecutionMode::kParallel : ExecutionMode::kSerial;
    parallel_for(fleet.size(), mode, [&](std::size_t i) {
        ClientRuntime& c = clients_[i];
        c.profile = std::move(fleet[i]);
        c.derms_community = c.profile.home_community % static_cast<int>(cfg_.communities);
        const auto trips = datagen::generate_trips(c.profile, cfg_.seed, gen);
        c.final_state.location = c.profile.home_community;
        c.final_state.timestamp = gen.epoch_start;
        if (!trips.empty()) {
            const auto& last = trips.back();
            c.final_state.battery_pct = last.charge_event ? 100.0 : last.battery_pct_after;
            c.final_state.location = last.dropoff_community;
            c.final_state.timestamp = last.charge_event ? last.charge_time : last.start_time;
            c.final_state.history = trips;
        }
        if (trips.size() >= 3) {
            const auto split = datagen::split_dataset(trips);
            c.train_samples = trainer::build_samples(split.train, scaler_);
            c.val_samples = trainer::build_samples(split.val, scaler_);
            c.test_samples = trainer::build_samples(split.test, scaler_);
        }
        c.viable = !c.train_samples.empty();
        c.weights.assign(layout_.dim(), 0.0);
    });

    communities_.resize(cfg_.communities);
    for (std::uint32_t c = 0; c < cfg_.communities; ++c) {
        communities_[c].model.community_id = static_cast<int>(c);
        communities_[c].model.theta.assign(layout_.dim(), 0.0);
        communities_[c].model.round = 0;
    }
    for (const auto& c : clients_) {
        communities_[c.derms_community].members.push_back(c.profile.ev_id);
    }
    for (auto& com : communities_) {
        std::sort(com.members.begin(), com.members.end());
        com.feature_summary.assign(trainer::kFeatureDim, 0.0);
        std::size_t counted = 0;
        for (ClientId id : com.members) {
            const auto& st = clients_[id].final_state;
            if (st.history.empty()) continue;
            const auto x = trainer::encode_features(st, scaler_);
            for (std::size_t f = 0; f < x.size(); ++f) com.feature_summary[f] += x[f];
            ++counted;
        }
        if (counted > 0) {
            for (auto& v : com.feature_summary) v /= static_cast<double>(counted);
        }
    }

    std::vector<ClientId> roster(clients_.size());
    for (std::size_t i = 0; i < roster.size(); ++i) roster[i] = static_cast<ClientId>(i);
    bool dccm = cfg_.dccm_enabled;
    bool crm = cfg_.crm_enabled;
    if (cfg_.ablated(config::Ablation::kCappingRotating)) {
        dccm = false;
        crm = false;
    }
    scheduler_ = std::make_unique<scheduler::RoundScheduler>(roster, cfg_.cap, dccm, crm);
}

void World::deliver(wire::Envelope env) {
    const int s = node_class(env.sender);
    const int r = node_class(env.receiver);
    const bool melsec_pair = (s == 0 && r == 0) || (s == 0 && r == 1) || (s == 1 && r == 0);
    const bool tls_pair = (s == 1 && r == 2) || (s == 2 && r == 1);
    if (melsec_pair) {
        if (env.channel_kind != wire::ChannelKind::kMelsecSim) {
            throw Error("EV-side traffic must ride the MeLSeC channel");
        }
        census_.melsec_envelopes += 1;
    } else if (tls_pair) {
        if (env.channel_kind != wire::ChannelKind::kTls13Sim) {
            throw Error("DERMS<->EPDC traffic must ride the TLS 1.3 channel");
        }
        census_.tls13_envelopes += 1;
    } else {
        throw Error("no channel between nodes " + std::to_string(env.sender) + " and " +
                    std::to_string(env.receiver));
    }
}

void World::broadcast_weights(const std::vector<ClientId>& targets, Round t, double sim_ts) {
    (void)t;
    // One frame per community, decoded independently by every recipient.
    std::map<int, std::vector<std::uint8_t>> frames;
    for (ClientId id : targets) {
        const int com = clients_[id].derms_community;
        auto it = frames.find(com);
        if (it == frames.end()) {
            wire::WireMessage msg;
            msg.msg_type = wire::MsgType::kGlobalWeights;
            msg.sender_id = kDermsNodeBase + static_cast<std::uint32_t>(com);
            msg.payload = ring::encode_vector(communities_[com].model.theta, codec_);
            it = frames.emplace(com, wire::encode_message(msg)).first;
        }
        deliver(wire::Envelope{wire::ChannelKind::kMelsecSim,
                               kDermsNodeBase + static_cast<std::uint32_t>(com), id,
                               it->second, sim_ts});
        census_.broadcast_msgs += 1;
        const auto msg = wire::decode_message(it->second);
        clients_[id].weights = ring::decode_vector(msg.payload, codec_);
    }
}

std::vector<World::TrainOutcome> World::train_active(const std::vector<ClientId>& active,
                                                     Round t) {
    std::vector<TrainOutcome> out(active.size());
    const auto mode = cfg_.parallel ? ExecutionMode::kParallel : ExecutionMode::kSerial;
    parallel_for(active.size(), mode, [&](std::size_t i) {
        ClientRuntime& c = clients_[active[i]];
        if (!c.viable) return;
        Rng rng(derive_seed(cfg_.seed, (std::uint64_t{t} << 32) | active[i], 0x7a11));
        try {
            out[i].weights =
                trainer::train_local(c.weights, layout_, c.train_samples, train_opts_, rng);
            out[i].encoded = ring::encode_vector(out[i].weights, codec_);
            out[i].ok = true;
        } catch (const Error&) {
            out[i].ok = false;  // skip-and-continue: failed client sits out the round
        }
    });
    return out;
}

RoundMetrics World::run_round() {
    const auto sched = scheduler_->advance();
    const Round t = sched.round;
    census_.total_scheduled += sched.active.size();

    std::vector<ClientId> active = sched.active;
    std::sort(active.begin(), active.end());

    const double train_ms =
        static_cast<double>(cfg_.per_client_flops) / cfg_.flops_per_ms;
    const double agg_ms =
        static_cast<double>(active.size()) * cfg_.agg_ms_per_contribution;

    // Receive global model weights.
    broadcast_weights(active, t, sim_clock_ms_);

    // Parallel local training; results committed in ascending client id.
    auto outcomes = train_active(active, t);
    std::unordered_set<std::uint64_t> round_weight_prints;
    std::vector<ClientId> trained;
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (!outcomes[i].ok) {
            privacy_.warnings.push_back("round " + std::to_string(t) + ": client " +
                                        std::to_string(active[i]) + " skipped (no usable data)");
            continue;
        }
        clients_[active[i]].weights = outcomes[i].weights;
        round_weight_prints.insert(derms::fingerprint(outcomes[i].encoded));
        trained.push_back(active[i]);
    }

    peer_inbox_.clear();
    derms_inbox_.clear();
    round_paths_.clear();
    retained_shares_.clear();

    // Roster snapshot for peer selection: only clients that finished training
    // count as available this round.
    std::vector<p2p::RosterEntry> roster;
    roster.reserve(trained.size());
    for (ClientId id : trained) {
        roster.push_back({id, clients_[id].derms_community, clients_[id].profile.transitory, true});
    }

    const double share_ts = sim_clock_ms_ + train_ms;
    auto histogram_payload = [this](const ring::RingVector& rv) {
        for (std::uint64_t e : rv.elems) {
            for (int b = 0; b < 8; ++b) {
                privacy_.byte_histogram[(e >> (8 * b)) & 0xFF] += 1;
            }
        }
        privacy_.masked_elements += rv.dim();
    };
    auto send_share_to_derms = [&](ClientId owner, const ring::SecretShare& share) {
        auto frame = wire::serialize_share(share);
        const int com = clients_[owner].derms_community;
        deliver(wire::Envelope{wire::ChannelKind::kMelsecSim, owner,
                               kDermsNodeBase + static_cast<std::uint32_t>(com), frame,
                               share_ts});
        histogram_payload(share.payload);
        derms_inbox_[com].push_back(std::move(frame));
    };

    // Observation tracking for the peer-exposure invariant.
    std::map<std::pair<ClientId, ClientId>, std::set<std::uint16_t>> observed;

    auto outcome_for = [&](ClientId id) -> const TrainOutcome& {
        const auto it = std::lower_bound(active.begin(), active.end(), id);
        return outcomes[static_cast<std::size_t>(it - active.begin())];
    };

    // Share submission phase.
    for (ClientId owner : trained) {
        const auto& enc = outcome_for(owner).encoded;
        Rng rng(derive_seed(cfg_.seed, (std::uint64_t{t} << 32) | owner, 0x51a7e));

        if (cfg_.ablated(config::Ablation::kSecretSharing)) {
            // Plaintext path: one unmasked frame straight to the DERMS.
            ring::SecretShare plain{owner, 0, 1, enc};
            auto frame = wire::serialize_share(plain);
            const int com = clients_[owner].derms_community;
            deliver(wire::Envelope{wire::ChannelKind::kMelsecSim, owner,
                                   kDermsNodeBase + static_cast<std::uint32_t>(com), frame,
                                   share_ts});
            histogram_payload(plain.payload);
            derms_inbox_[com].push_back(std::move(frame));
            census_.plaintext_weight_msgs += 1;
            round_paths_[owner] = clients_[owner].profile.transitory
                                      ? p2p::Path::kTransitoryDirect
                                      : p2p::Path::kDirectFallback;
            continue;
        }

        if (clients_[owner].profile.transitory) {
            const auto shares = ring::partition(enc, cfg_.k_transitory, owner, rng);
            for (const auto& s : shares) {
                send_share_to_derms(owner, s);
                census_.direct_share_msgs += 1;
            }
            round_paths_[owner] = p2p::Path::kTransitoryDirect;
            continue;
        }

        const auto group = p2p::select_peers(owner, roster, t, pairing_ledger_);
        if (!group) {
            const auto shares = ring::partition(enc, cfg_.k_transitory, owner, rng);
            for (const auto& s : shares) {
                send_share_to_derms(owner, s);
                census_.direct_share_msgs += 1;
            }
            round_paths_[owner] = p2p::Path::kDirectFallback;
            continue;
        }

        pairing_ledger_.record(owner, group->members, t);
        const auto k = static_cast<std::uint16_t>(group->members.size() + 1);
        const auto shares = ring::partition(enc, k, owner, rng);
        const auto assignment = p2p::distribute_shares(shares, *group);
        for (const auto& [peer, share] : assignment) {
            auto frame = wire::serialize_share(share);
            deliver(wire::Envelope{wire::ChannelKind::kMelsecSim, owner, peer, frame, share_ts});
            histogram_payload(share.payload);
            auto& seen = observed[{peer, owner}];
            seen.insert(share.share_index);
            if (seen.size() >= share.share_count) {
                privacy_.peer_overexposure_events += 1;
            }
            peer_inbox_[peer].push_back(std::move(frame));
            census_.p2p_share_msgs += 1;
        }
        retained_shares_.emplace(owner, shares[k - 1]);
        round_paths_[owner] = p2p::Path::kP2pAugmented;
    }

    // Augmentation barrier: every send above has completed.
    for (ClientId owner : trained) {
        auto it = retained_shares_.find(owner);
        if (it == retained_shares_.end()) continue;
        std::vector<ring::SecretShare> received;
        if (auto inbox = peer_inbox_.find(owner); inbox != peer_inbox_.end()) {
            received.reserve(inbox->second.size());
            for (const auto& frame : inbox->second) {
                received.push_back(wire::deserialize_share(frame));
            }
            std::sort(received.begin(), received.end(),
                      [](const auto& a, const auto& b) { return a.sender_id < b.sender_id; });
        }
        auto contribution = p2p::augment(it->second, received, aug_cfg_);
        ring::SecretShare out{owner, it->second.share_index, it->second.share_count,
                              contribution.parts.front()};
        send_share_to_derms(owner, out);
        census_.augmented_contribution_msgs += 1;
    }

    for (const auto& [id, path] : round_paths_) {
        census_.contributions_by_path[path] += 1;
    }

    // DERMS aggregation, community by community.
    const double post_agg_ts = sim_clock_ms_ + train_ms + agg_ms;
    for (std::uint32_t com = 0; com < cfg_.communities; ++com) {
        auto inbox = derms_inbox_.find(static_cast<int>(com));
        if (inbox == derms_inbox_.end() || inbox->second.empty()) {
            privacy_.warnings.push_back("round " + std::to_string(t) + ": community " +
                                        std::to_string(com) + " received no contributions");
            continue;
        }
        std::map<ClientId, std::vector<ring::RingVector>> by_sender;
        for (const auto& frame : inbox->second) {
            auto share = wire::deserialize_share(frame);
            by_sender[share.sender_id].push_back(std::move(share.payload));
        }
        std::vector<p2p::Contribution> contributions;
        contributions.reserve(by_sender.size());
        for (auto& [sender, parts] : by_sender) {
            contributions.push_back({sender, round_paths_.at(sender), std::move(parts)});
        }
        if (contributions.size() == 1) {
            privacy_.warnings.push_back(
                "round " + std::to_string(t) + ": community " + std::to_string(com) +
                " aggregated a single contribution; the aggregate equals that client's model");
        }

        auto& community = communities_[com];
        const std::size_t audit_before = community.audit.entries().size();
        std::vector<double> theta;
        if (cfg_.ablated(config::Ablation::kSecureAggregation)) {
            theta = derms::aggregate_reconstructing(contributions, contributions.size(), codec_,
                                                    &community.audit, t);
            census_.derms_reconstructions += contributions.size();
        } else {
            theta = derms::secure_aggregate(contributions, contributions.size(), codec_,
                                            &community.audit, t);
        }
        std::vector<double> theta_n;
        if (cfg_.ablated(config::Ablation::kNormalisation)) {
            theta_n = std::move(theta);
        } else {
            theta_n = derms::normalize(theta, cfg_.tau);
            census_.normalize_rounds += 1;
        }
        // Commit the codec-quantized weights: the model state is exactly the
        // broadcast payload, so every client ends the round bit-identical to
        // the DERMS.
        theta_n = ring::decode_vector(ring::encode_vector(theta_n, codec_), codec_);
        derms::commit_update(community.model, std::move(theta_n));

        // Honest-but-curious scan: with two or more contributors, nothing the
        // DERMS held this round may equal an individual client's weights.
        if (contributions.size() >= 2) {
            const auto& entries = community.audit.entries();
            for (std::size_t i = audit_before; i < entries.size(); ++i) {
                if (round_weight_prints.count(entries[i].hash) != 0) {
                    privacy_.derms_log_weight_matches += 1;
                }
            }
        }
    }

    // Send updated global weights back to the active clients, then predictions
    // to the EPDC over TLS.
    broadcast_weights(active, t, post_agg_ts);
    for (std::uint32_t com = 0; com < cfg_.communities; ++com) {
        auto& community = communities_[com];
        if (community.model.round == 0) continue;
        const auto rec = derms::emit_prediction(community.model, community.feature_summary,
                                                layout_, scaler_);
        wire::WireMessage msg;
        msg.msg_type = wire::MsgType::kPrediction;
        msg.sender_id = kDermsNodeBase + com;
        msg.payload.elems = {static_cast<std::uint64_t>(rec.community_id),
                             static_cast<std::uint64_t>(rec.predicted_location),
                             static_cast<std::uint64_t>(rec.predicted_time),
                             static_cast<std::uint64_t>(rec.round)};
        auto frame = wire::encode_message(msg);
        deliver(wire::Envelope{wire::ChannelKind::kTls13Sim, kDermsNodeBase + com, kEpdcNodeId,
                               frame, post_agg_ts});
        census_.prediction_msgs += 1;
        const auto parsed = wire::decode_message(frame);
        epdc_records_.push_back({static_cast<int>(parsed.payload.elems[0]),
                                 static_cast<int>(parsed.payload.elems[1]),
                                 static_cast<std::int64_t>(parsed.payload.elems[2]),
                                 static_cast<Round>(parsed.payload.elems[3])});
    }
    epdc_demand_ = derms::epdc_ingest(epdc_records_);

    // Pooled evaluation of the committed community models over every
    // enrolled client's splits.
    struct EvalSlot {
        trainer::EvalResult train, val, test;
    };
    std::vector<EvalSlot> eval(clients_.size());
    const auto mode = cfg_.parallel ? ExecutionMode::kParallel : ExecutionMode::kSerial;
    parallel_for(clients_.size(), mode, [&](std::size_t i) {
        const auto& c = clients_[i];
        const auto& theta = communities_[c.derms_community].model.theta;
        if (!c.train_samples.empty()) {
            eval[i].train = trainer::evaluate(theta, layout_, c.train_samples, cfg_.lambda_time);
        }
        if (!c.val_samples.empty()) {
            eval[i].val = trainer::evaluate(theta, layout_, c.val_samples, cfg_.lambda_time);
        }
        if (!c.test_samples.empty()) {
            eval[i].test = trainer::evaluate(theta, layout_, c.test_samples, cfg_.lambda_time);
        }
    });
    double train_loss = 0, val_loss = 0, test_loss = 0, test_acc = 0, test_mse = 0;
    std::size_t n_train = 0, n_val = 0, n_test = 0;
    for (const auto& e : eval) {
        train_loss += e.train.loss * static_cast<double>(e.train.sample_count);
        n_train += e.train.sample_count;
        val_loss += e.val.loss * static_cast<double>(e.val.sample_count);
        n_val += e.val.sample_count;
        test_loss += e.test.loss * static_cast<double>(e.test.sample_count);
        test_acc += e.test.location_accuracy * static_cast<double>(e.test.sample_count);
        test_mse += e.test.time_mse * static_cast<double>(e.test.sample_count);
        n_test += e.test.sample_count;
    }
    if (n_train > 0) train_loss /= static_cast<double>(n_train);
    if (n_val > 0) val_loss /= static_cast<double>(n_val);
    if (n_test > 0) {
        test_loss /= static_cast<double>(n_test);
        test_acc /= static_cast<double>(n_test);
        test_mse /= static_cast<double>(n_test);
    }

    RoundMetrics m;
    m.epoch = t;
    m.active_clients = sched.active.size();
    m.total_flops = scheduler::flops_for_round(sched.active.size(), cfg_.per_client_flops);
    m.sim_time_ms = train_ms + agg_ms;
    m.per_epoch_diversity = sched.per_epoch_ratio();
    m.cumulative_diversity = sched.cumulative_ratio();
    m.train_loss = train_loss;
    m.val_loss = val_loss;
    m.test_location_accuracy = test_acc;
    m.test_time_mse = test_mse;
    m.generalization_gap_pct =
        train_loss > 1e-12 ? std::fabs(test_loss - train_loss) / train_loss * 100.0 : 0.0;

    sim_clock_ms_ += m.sim_time_ms;
    return m;
}

ExperimentResult run_experiment(const config::ExperimentConfig& cfg) {
    World world(cfg);
    ExperimentResult result;
    std::ostringstream csv;
    csv << metrics_csv_header() << '\n';
    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
        result.rounds.push_back(world.run_round());
        csv << metrics_csv_row(result.rounds.back()) << '\n';
    }
    result.metrics_csv = csv.str();
    result.census = world.census();
    result.privacy = world.privacy();
    result.epdc_demand = world.epdc_demand();
    const double loss0 = result.rounds.front().train_loss;
    const double lossE = result.rounds.back().train_loss;
    result.loss_decrease_rate_pct = loss0 > 1e-12 ? (loss0 - lossE) / loss0 * 100.0 : 0.0;
    result.generalization_gap_pct = result.rounds.back().generalization_gap_pct;

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        {
            std::ofstream out(fs::path(cfg.out_dir) / "metrics.csv", std::ios::binary);
            out << result.metrics_csv;
        }
        {
            std::ofstream out(fs::path(cfg.out_dir) / "config.resolved");
            config::echo_resolved(cfg, out);
        }
        for (const auto& com : world.communities()) {
            wire::WireMessage msg;
            msg.msg_type = wire::MsgType::kGlobalWeights;
            msg.sender_id = kDermsNodeBase + static_cast<std::uint32_t>(com.model.community_id);
            msg.payload = ring::encode_vector(com.model.theta, world.codec());
            const auto frame = wire::encode_message(msg);
            std::ofstream out(fs::path(cfg.out_dir) / ("model_community_" +
                                                       std::to_string(com.model.community_id) +
                                                       ".bin"),
                              std::ios::binary);
            out.write(reinterpret_cast<const char*>(frame.data()),
                      static_cast<std::streamsize>(frame.size()));
        }
        if (!result.privacy.warnings.empty()) {
            std::ofstream out(fs::path(cfg.out_dir) / "warnings.log");
            for (const auto& w : result.privacy.warnings) out << w << '\n';
        }
    }
    return result;
}

ExperimentResult run_experiment_to_dir(const config::ExperimentConfig& cfg,
                                       const std::string& out_dir) {
    config::ExperimentConfig copy = cfg;
    copy.out_dir = out_dir;
    return run_experiment(copy);
}

}  // namespace hfltn::simnet
