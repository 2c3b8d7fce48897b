#pragma once

#include <string>
#include <vector>

#include "hfltn/config.hpp"
#include "hfltn/simnet.hpp"

namespace hfltn::runner {

struct MatrixRun {
    std::string label;  // "baseline" or the ablated feature name
    config::ExperimentConfig cfg;
    simnet::ExperimentResult result;
};

/// Baseline plus each single-feature-removed variant, all on the base
/// config's seed. When the base config names an output directory each run
/// writes its artifacts into a subdirectory, and a summary.txt comparison
/// table lands at the top level. Privacy assertions are evaluated per run;
/// the secret_sharing and secure_aggregation rows are expected to fail
/// theirs, which the summary marks explicitly.
std::vector<MatrixRun> run_ablation_matrix(const config::ExperimentConfig& base);

std::string matrix_summary(const std::vector<MatrixRun>& runs);

struct SubgroupRun {
    std::string label;  // "A", "B", "C"
    std::uint64_t seed;
    simnet::ExperimentResult result;
};

/// Three-seed replication of one config (subgroups A/B/C), reported
/// separately and pooled.
std::vector<SubgroupRun> run_subgroups(const config::ExperimentConfig& base);

std::string subgroup_summary(const std::vector<SubgroupRun>& runs);

}  // namespace hfltn::runner
