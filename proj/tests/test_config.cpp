#include <doctest.h>

#include <sstream>

#include "hfltn/config.hpp"

using namespace hfltn;
using namespace hfltn::config;

TEST_CASE("flag overrides beat file values") {
    std::istringstream file("n_evs=500\ncap=150\n");
    const auto entries = read_config_file(file);
    const auto cfg = build_config(entries, {{"cap", "300"}});
    CHECK(cfg.cap == 300);
    CHECK(cfg.n_evs == 500);
}

TEST_CASE("config file syntax: comments, blanks, malformed lines") {
    std::istringstream file("# comment\n\nn_evs = 64   # trailing comment\nseed=9\n");
    const auto entries = read_config_file(file);
    const auto cfg = build_config(entries, {});
    CHECK(cfg.n_evs == 64);
    CHECK(cfg.seed == 9);

    std::istringstream bad("n_evs 64\n");
    CHECK_THROWS_AS(read_config_file(bad), ConfigInvalid);
}

TEST_CASE("validation failures name the offending key") {
    CHECK_THROWS_WITH_AS(build_config({}, {}), "n_evs: required and must be >= 1",
                         ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"ablate", "dropout"}}, {}), ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"frobnicate", "1"}}, {}), ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"cap", "200"}}, {}), ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"tau", "-1"}}, {}), ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"k_transitory", "1"}}, {}), ConfigInvalid);
    CHECK_THROWS_AS(build_config({{"n_evs", "100"}, {"epochs", "0"}}, {}), ConfigInvalid);
    // ring headroom: 5000 clients overflow the default codec settings
    CHECK_THROWS_AS(build_config({{"n_evs", "5000"}, {"cap", "100"}}, {}), ConfigInvalid);
}

TEST_CASE("cap above n_evs is fine once dccm is off") {
    const auto cfg = build_config({{"n_evs", "100"}, {"cap", "200"}, {"dccm", "false"}}, {});
    CHECK(cfg.cap == 200);
    CHECK_FALSE(cfg.dccm_enabled);
}

TEST_CASE("ablations parse from comma lists and repeated entries") {
    const auto cfg = build_config(
        {{"n_evs", "100"}, {"ablate", "secret_sharing,normalisation"}, {"ablate", "capping_rotating"}},
        {});
    CHECK(cfg.ablations.size() == 3);
    CHECK(cfg.ablated(Ablation::kSecretSharing));
    CHECK(cfg.ablated(Ablation::kNormalisation));
    CHECK(cfg.ablated(Ablation::kCappingRotating));
    CHECK_FALSE(cfg.ablated(Ablation::kSecureAggregation));
}

TEST_CASE("resolved echo re-parses to the same config") {
    const auto cfg = build_config({{"n_evs", "321"},
                                   {"cap", "45"},
                                   {"seed", "17"},
                                   {"ablate", "normalisation"},
                                   {"alpha", "1.5"},
                                   {"trips_per_day", "2.5"}},
                                  {});
    std::ostringstream os;
    echo_resolved(cfg, os);
    std::istringstream is(os.str());
    const auto back = build_config(read_config_file(is), {});
    CHECK(back.n_evs == cfg.n_evs);
    CHECK(back.cap == cfg.cap);
    CHECK(back.seed == cfg.seed);
    CHECK(back.ablations == cfg.ablations);
    CHECK(back.alpha == cfg.alpha);
    CHECK(back.trips_per_day == cfg.trips_per_day);
    CHECK(back.parallel == cfg.parallel);
}
