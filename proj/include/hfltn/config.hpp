#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hfltn/errors.hpp"

namespace hfltn::config {

enum class Ablation {
    kCappingRotating,
    kSecretSharing,
    kSecureAggregation,
    kNormalisation,
};

const char* ablation_name(Ablation a);
Ablation ablation_from_name(const std::string& name);  // throws ConfigInvalid

struct ExperimentConfig {
    // population & schedule
    std::uint32_t n_evs = 0;  // required
    std::uint32_t cap = 150;
    std::uint32_t epochs = 10;
    std::uint64_t seed = 1;
    std::uint32_t communities = 2;
    bool dccm_enabled = true;
    bool crm_enabled = true;
    std::set<Ablation> ablations;

    // protocol parameters
    double alpha = 1.0;
    double tau = 100.0;
    std::uint16_t k_transitory = 3;  // also the share count on the fallback path
    std::uint64_t per_client_flops = 499200;

    // ring codec
    unsigned scale_bits = 32;
    double w_max = 1048576.0;

    // synthetic dataset
    std::uint32_t days = 60;
    double trips_per_day = 3.0;
    double mean_trip_km = 25.0;
    double transitory_fraction = 0.2;

    // local trainer
    int local_epochs = 3;
    double learning_rate = 0.05;
    double lambda_time = 1.0;

    // simulated-time model
    double flops_per_ms = 10000.0;
    double agg_ms_per_contribution = 1.0;

    // execution
    bool parallel = true;
    std::string out_dir;

    bool ablated(Ablation a) const { return ablations.count(a) != 0; }
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues read_config_file(std::istream& is);

/// Builds and validates a config from file entries plus flag overrides
/// (overrides win). Throws ConfigInvalid naming the offending key.
ExperimentConfig build_config(const KeyValues& file_entries, const KeyValues& overrides);

/// parse_config convenience: empty path means flags only.
ExperimentConfig parse_config(const std::string& path, const KeyValues& overrides);

/// Writes the fully-resolved key=value form, suitable for re-parsing.
void echo_resolved(const ExperimentConfig& cfg, std::ostream& os);

}  // namespace hfltn::config
