#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hfltn/config.hpp"
#include "hfltn/datagen.hpp"
#include "hfltn/runner.hpp"
#include "hfltn/simnet.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides_n;  // staged key=value overrides
    hfltn::config::KeyValues overrides;
};

void add_experiment_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value config file");
    auto stage = [&flags](const std::string& key) {
        return [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--n-evs", stage("n_evs"), "total enrolled EVs");
    cmd->add_option_function<std::string>("--cap", stage("cap"), "max active clients per round");
    cmd->add_option_function<std::string>("--epochs", stage("epochs"), "global training rounds");
    cmd->add_option_function<std::string>("--seed", stage("seed"), "master seed");
    cmd->add_option_function<std::string>("--out", stage("out"), "output directory");
    cmd->add_option_function<std::string>("--communities", stage("communities"),
                                          "number of DERMS communities");
    cmd->add_option_function<std::string>("--alpha", stage("alpha"),
                                          "peer-update scaling factor");
    cmd->add_option_function<std::string>("--tau", stage("tau"), "normalization radius");
    cmd->add_option_function<std::string>("--days", stage("days"), "dataset horizon in days");
    cmd->add_flag_callback("--no-dccm",
                           [&flags] { flags.overrides.emplace_back("dccm", "false"); },
                           "disable client capping");
    cmd->add_flag_callback("--no-crm",
                           [&flags] { flags.overrides.emplace_back("crm", "false"); },
                           "disable client rotation");
    cmd->add_flag_callback("--serial",
                           [&flags] { flags.overrides.emplace_back("parallel", "false"); },
                           "run the serial reference path");
    cmd->add_option_function<std::string>(
        "--ablate",
        [&flags](const std::string& v) { flags.overrides.emplace_back("ablate", v); },
        "remove a feature: capping_rotating | secret_sharing | secure_aggregation | "
        "normalisation (repeatable)")
        ->take_all();
}

void print_result(const hfltn::simnet::ExperimentResult& r, const std::string& out_dir) {
    if (out_dir.empty()) {
        std::cout << r.metrics_csv;
    } else {
        std::cout << "wrote " << out_dir << "/metrics.csv (" << r.rounds.size()
                  << " epochs)\n";
    }
    const auto& last = r.rounds.back();
    std::printf("final: train_loss=%.6g test_accuracy=%.6g test_time_mse=%.6g "
                "loss_decrease=%.4g%% gen_gap=%.4g%%\n",
                last.train_loss, last.test_location_accuracy, last.test_time_mse,
                r.loss_decrease_rate_pct, r.generalization_gap_pct);
    std::printf("privacy: non_reconstruction=%s peer_exposure=%s share_uniformity=%s\n",
                r.privacy.non_reconstruction_ok() ? "pass" : "FAIL",
                r.privacy.peer_exposure_ok() ? "pass" : "FAIL",
                !r.privacy.uniformity_applicable() ? "n/a"
                : r.privacy.uniformity_ok()        ? "pass"
                                                   : "FAIL");
    for (const auto& w : r.privacy.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"H-FLTN protocol simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_experiment_flags(run_cmd, run_flags);
    bool abc = false;
    run_cmd->add_flag("--abc", abc, "replicate as subgroups A/B/C (three seeds) and pool");

    CommonFlags matrix_flags;
    auto* matrix_cmd =
        app.add_subcommand("ablation-matrix", "baseline plus each single-feature ablation");
    add_experiment_flags(matrix_cmd, matrix_flags);

    auto* datagen_cmd = app.add_subcommand("datagen", "export the synthetic mobility dataset");
    std::uint32_t dg_n = 100;
    std::uint64_t dg_seed = 1;
    int dg_days = 365;
    std::string dg_out;
    datagen_cmd->add_option("--n-evs", dg_n, "fleet size");
    datagen_cmd->add_option("--seed", dg_seed, "master seed");
    datagen_cmd->add_option("--days", dg_days, "horizon in days");
    datagen_cmd->add_option("--out", dg_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const auto cfg =
                hfltn::config::parse_config(run_flags.config_path, run_flags.overrides);
            if (abc) {
                const auto runs = hfltn::runner::run_subgroups(cfg);
                std::cout << hfltn::runner::subgroup_summary(runs);
            } else {
                const auto result = hfltn::simnet::run_experiment(cfg);
                print_result(result, cfg.out_dir);
            }
        } else if (matrix_cmd->parsed()) {
            const auto cfg =
                hfltn::config::parse_config(matrix_flags.config_path, matrix_flags.overrides);
            const auto runs = hfltn::runner::run_ablation_matrix(cfg);
            std::cout << hfltn::runner::matrix_summary(runs);
        } else if (datagen_cmd->parsed()) {
            hfltn::datagen::GenConfig gen;
            gen.days = dg_days;
            const auto fleet = hfltn::datagen::generate_fleet(dg_n, dg_seed, gen);
            std::ofstream file;
            std::ostream* os = &std::cout;
            if (!dg_out.empty()) {
                file.open(dg_out, std::ios::binary);
                if (!file) throw hfltn::Error("cannot open " + dg_out);
                os = &file;
            }
            for (const auto& ev : fleet) {
                const auto trips = hfltn::datagen::generate_trips(ev, dg_seed, gen);
                hfltn::datagen::export_trips(*os, trips);
            }
        }
    } catch (const hfltn::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
