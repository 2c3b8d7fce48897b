#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hfltn/errors.hpp"
#include "hfltn/rng.hpp"

namespace hfltn::datagen {

inline constexpr int kCommunityAreas = 77;
inline constexpr int kEvModelCount = 9;
inline constexpr double kMinRangeKm = 143.0;
inline constexpr double kMaxRangeKm = 416.0;
inline constexpr double kChargeThresholdPct = 20.0;

struct EvModelSpec {
    int model_id = 0;
    double range_km = 0.0;
};

/// The nine fleet models, ranges evenly spaced over [143, 416] km.
std::vector<EvModelSpec> ev_model_catalog();

struct TripRecord {
    std::uint32_t ev_id = 0;
    int pickup_community = 0;
    int dropoff_community = 0;
    double distance_km = 0.0;
    std::int64_t start_time = 0;       // Unix seconds
    double battery_pct_after = 0.0;    // before any recharge on this trip
    bool charge_event = false;
    std::int64_t charge_time = 0;      // Unix seconds, 0 when no charge_event

    bool operator==(const TripRecord&) const = default;
};

struct EvProfile {
    std::uint32_t ev_id = 0;
    int model_id = 0;
    double range_km = 0.0;
    int home_community = 0;
    bool transitory = false;
    // Per-EV charging-location preference over the 77 areas
    // (Dirichlet-perturbed, centered on the home community).
    std::vector<double> location_preference;
};

struct GenConfig {
    std::int64_t epoch_start = 1672531200;  // 2023-01-01T00:00:00Z
    int days = 365;
    double trips_per_day = 3.0;
    double mean_trip_km = 25.0;
    double transitory_fraction = 0.2;
    double speed_kmh = 40.0;
    double pref_alpha_home = 4.0;   // Dirichlet concentration on home area
    double pref_alpha_other = 0.05; // and on every other area

    std::int64_t window_end() const { return epoch_start + std::int64_t{days} * 86400; }
};

std::vector<EvProfile> generate_fleet(std::uint32_t n_evs, std::uint64_t seed,
                                      const GenConfig& cfg = {});

std::vector<TripRecord> generate_trips(const EvProfile& ev, std::uint64_t seed,
                                       const GenConfig& cfg = {});

double battery_drain_pct(double distance_km, double range_km);

struct DatasetSplit {
    std::vector<TripRecord> train;
    std::vector<TripRecord> val;
    std::vector<TripRecord> test;
};

/// Chronological prefix split: 85% train+val / 15% test, then 85/15 again
/// inside train+val (so 72.25 / 12.75 / 15 overall, floor arithmetic).
DatasetSplit split_dataset(std::span<const TripRecord> trips);

// Line-delimited export, one record per line, LF terminators:
// ev_id,pickup,dropoff,distance_km,start_time,battery_pct_after,charge_event,charge_time
void export_trips(std::ostream& os, std::span<const TripRecord> trips);
std::vector<TripRecord> import_trips(std::istream& is);
std::string trip_to_line(const TripRecord& r);

}  // namespace hfltn::datagen
