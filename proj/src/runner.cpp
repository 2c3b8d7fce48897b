#include "hfltn/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hfltn::runner {

namespace {

std::string join_path(const std::string& base, const std::string& sub) {
    if (base.empty()) return "";
    return (std::filesystem::path(base) / sub).string();
}

const char* mark(bool ok, bool expected_to_fail) {
    if (expected_to_fail) return ok ? "pass (UNEXPECTED)" : "fail (expected)";
    return ok ? "pass" : "FAIL";
}

}  // namespace

std::vector<MatrixRun> run_ablation_matrix(const config::ExperimentConfig& base) {
    std::vector<MatrixRun> runs;

    config::ExperimentConfig baseline = base;
    baseline.ablations.clear();
    baseline.out_dir = join_path(base.out_dir, "baseline");
    runs.push_back({"baseline", baseline, simnet::run_experiment(baseline)});

    for (auto a : {config::Ablation::kCappingRotating, config::Ablation::kSecretSharing,
                   config::Ablation::kSecureAggregation, config::Ablation::kNormalisation}) {
        config::ExperimentConfig cfg = base;
        cfg.ablations = {a};
        cfg.out_dir = join_path(base.out_dir, std::string("ablate_") + config::ablation_name(a));
        runs.push_back({config::ablation_name(a), cfg, simnet::run_experiment(cfg)});
    }

    if (!base.out_dir.empty()) {
        std::filesystem::create_directories(base.out_dir);
        std::ofstream out(std::filesystem::path(base.out_dir) / "summary.txt");
        out << matrix_summary(runs);
    }
    return runs;
}

std::string matrix_summary(const std::vector<MatrixRun>& runs) {
    std::ostringstream os;
    os << "run,final_train_loss,final_test_accuracy,final_test_time_mse,"
          "flops_per_epoch,gen_gap_pct,non_reconstruction,peer_exposure,share_uniformity\n";
    for (const auto& r : runs) {
        const auto& last = r.result.rounds.back();
        const bool expect_privacy_fail = r.label == "secret_sharing";
        const bool expect_reconstruction = r.label == "secure_aggregation" ||
                                           r.label == "secret_sharing";
        char buf[64];
        auto real = [&buf](double v) {
            std::snprintf(buf, sizeof(buf), "%.6g", v);
            return std::string(buf);
        };
        os << r.label << ',' << real(last.train_loss) << ','
           << real(last.test_location_accuracy) << ',' << real(last.test_time_mse) << ','
           << last.total_flops << ',' << real(r.result.generalization_gap_pct) << ','
           << mark(r.result.privacy.non_reconstruction_ok(), expect_reconstruction) << ','
           << mark(r.result.privacy.peer_exposure_ok(), false) << ','
           << mark(!r.result.privacy.uniformity_applicable() || r.result.privacy.uniformity_ok(),
                   expect_privacy_fail)
           << '\n';
    }
    return os.str();
}

std::vector<SubgroupRun> run_subgroups(const config::ExperimentConfig& base) {
    std::vector<SubgroupRun> runs;
    const char* labels[3] = {"A", "B", "C"};
    for (int i = 0; i < 3; ++i) {
        config::ExperimentConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(i);
        cfg.out_dir = join_path(base.out_dir, labels[i]);
        runs.push_back({labels[i], cfg.seed, simnet::run_experiment(cfg)});
    }
    if (!base.out_dir.empty()) {
        std::filesystem::create_directories(base.out_dir);
        std::ofstream out(std::filesystem::path(base.out_dir) / "subgroups.txt");
        out << subgroup_summary(runs);
    }
    return runs;
}

std::string subgroup_summary(const std::vector<SubgroupRun>& runs) {
    std::ostringstream os;
    char buf[64];
    auto real = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    os << "subgroup,seed,final_test_accuracy,final_test_time_mse,gen_gap_pct\n";
    double acc = 0, mse = 0, gap = 0;
    for (const auto& r : runs) {
        const auto& last = r.result.rounds.back();
        os << r.label << ',' << r.seed << ',' << real(last.test_location_accuracy) << ','
           << real(last.test_time_mse) << ',' << real(r.result.generalization_gap_pct) << '\n';
        acc += last.test_location_accuracy;
        mse += last.test_time_mse;
        gap += r.result.generalization_gap_pct;
    }
    const double inv = 1.0 / static_cast<double>(runs.size());
    os << "pooled,-," << real(acc * inv) << ',' << real(mse * inv) << ',' << real(gap * inv)
       << '\n';
    return os.str();
}

}  // namespace hfltn::runner
