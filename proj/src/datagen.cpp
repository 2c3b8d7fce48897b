#include "hfltn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace hfltn::datagen {

std::vector<EvModelSpec> ev_model_catalog() {
    std::vector<EvModelSpec> specs(kEvModelCount);
    const double step = (kMaxRangeKm - kMinRangeKm) / (kEvModelCount - 1);
    for (int i = 0; i < kEvModelCount; ++i) {
        specs[i] = {i, kMinRangeKm + step * i};
    }
    return specs;
}

double battery_drain_pct(double distance_km, double range_km) {
    return distance_km / range_km * 100.0;
}

namespace {

std::vector<double> draw_preference(int home, double alpha_home, double alpha_other, Rng& rng) {
    std::vector<double> pref(kCommunityAreas);
    double total = 0.0;
    for (int c = 0; c < kCommunityAreas; ++c) {
        std::gamma_distribution<double> g(c == home ? alpha_home : alpha_other, 1.0);
        pref[c] = g(rng);
        total += pref[c];
    }
    for (auto& p : pref) p /= total;
    return pref;
}

int sample_category(std::span<const double> pmf, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double r = u(rng);
    double acc = 0.0;
    for (std::size_t c = 0; c < pmf.size(); ++c) {
        acc += pmf[c];
        if (r < acc) return static_cast<int>(c);
    }
    return static_cast<int>(pmf.size()) - 1;
}

}  // namespace

std::vector<EvProfile> generate_fleet(std::uint32_t n_evs, std::uint64_t seed,
                                      const GenConfig& cfg) {
    const auto catalog = ev_model_catalog();
    std::vector<EvProfile> fleet(n_evs);
    for (std::uint32_t i = 0; i < n_evs; ++i) {
        Rng rng(derive_seed(seed, i, 0x66ee7));
        EvProfile& ev = fleet[i];
        ev.ev_id = i;
        ev.model_id = static_cast<int>(
            std::uniform_int_distribution<int>(0, kEvModelCount - 1)(rng));
        ev.range_km = catalog[ev.model_id].range_km;
        ev.home_community =
            std::uniform_int_distribution<int>(0, kCommunityAreas - 1)(rng);
        ev.transitory =
            std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.transitory_fraction;
        ev.location_preference =
            draw_preference(ev.home_community, cfg.pref_alpha_home, cfg.pref_alpha_other, rng);
    }
    return fleet;
}

std::vector<TripRecord> generate_trips(const EvProfile& ev, std::uint64_t seed,
                                       const GenConfig& cfg) {
    Rng rng(derive_seed(seed, ev.ev_id, 0x7219));
    std::vector<TripRecord> trips;
    const std::int64_t window_end = cfg.window_end();
    const double mean_gap_s = 86400.0 / cfg.trips_per_day;

    std::exponential_distribution<double> gap_dist(1.0 / mean_gap_s);
    std::gamma_distribution<double> dist_dist(4.0, cfg.mean_trip_km / 4.0);

    double battery = 100.0;
    int location = ev.home_community;
    double t = static_cast<double>(cfg.epoch_start) + gap_dist(rng);

    while (static_cast<std::int64_t>(t) < window_end) {
        TripRecord r;
        r.ev_id = ev.ev_id;
        r.pickup_community = location;
        r.dropoff_community = sample_category(ev.location_preference, rng);
        r.distance_km = dist_dist(rng);
        r.start_time = static_cast<std::int64_t>(t);

        battery -= battery_drain_pct(r.distance_km, ev.range_km);
        if (battery < 0.0) battery = 0.0;
        r.battery_pct_after = battery;

        const double duration_s = r.distance_km / cfg.speed_kmh * 3600.0;
        if (battery < kChargeThresholdPct) {
            r.charge_event = true;
            // Recharge at the dropoff community shortly after arrival.
            r.charge_time = r.start_time + static_cast<std::int64_t>(duration_s) + 300;
            battery = 100.0;
        }

        location = r.dropoff_community;
        trips.push_back(r);
        t += duration_s + gap_dist(rng);
    }
    return trips;
}

DatasetSplit split_dataset(std::span<const TripRecord> trips) {
    if (trips.size() < 3) {
        throw TooFewRecords("need at least 3 trips, have " + std::to_string(trips.size()));
    }
    const std::size_t n = trips.size();
    const auto n_trainval = static_cast<std::size_t>(std::floor(0.85 * static_cast<double>(n)));
    const auto n_train =
        static_cast<std::size_t>(std::floor(0.85 * static_cast<double>(n_trainval)));
    DatasetSplit s;
    s.train.assign(trips.begin(), trips.begin() + n_train);
    s.val.assign(trips.begin() + n_train, trips.begin() + n_trainval);
    s.test.assign(trips.begin() + n_trainval, trips.end());
    return s;
}

std::string trip_to_line(const TripRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%u,%d,%d,%.9g,%lld,%.9g,%d,%lld", r.ev_id,
                  r.pickup_community, r.dropoff_community, r.distance_km,
                  static_cast<long long>(r.start_time), r.battery_pct_after,
                  r.charge_event ? 1 : 0, static_cast<long long>(r.charge_time));
    return buf;
}

void export_trips(std::ostream& os, std::span<const TripRecord> trips) {
    for (const auto& r : trips) {
        os << trip_to_line(r) << '\n';
    }
}

std::vector<TripRecord> import_trips(std::istream& is) {
    std::vector<TripRecord> trips;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        TripRecord r;
        long long start = 0, charge = 0;
        int charge_flag = 0;
        if (std::sscanf(line.c_str(), "%u,%d,%d,%lg,%lld,%lg,%d,%lld", &r.ev_id,
                        &r.pickup_community, &r.dropoff_community, &r.distance_km, &start,
                        &r.battery_pct_after, &charge_flag, &charge) != 8) {
            throw Error("malformed trip line: " + line);
        }
        r.start_time = start;
        r.charge_event = charge_flag != 0;
        r.charge_time = charge;
        trips.push_back(r);
    }
    return trips;
}

}  // namespace hfltn::datagen
