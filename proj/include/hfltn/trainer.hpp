#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfltn/datagen.hpp"
#include "hfltn/errors.hpp"
#include "hfltn/rng.hpp"

namespace hfltn::trainer {

/// Min-max scaling of Unix timestamps into [0,1] over the dataset window.
/// Shared by every client so the regression head has one global scale;
/// unscale is exact to one second for timestamps inside the window.
struct TimeScaler {
    std::int64_t t_min = 0;
    std::int64_t t_max = 1;

    double scale(std::int64_t t) const {
        return static_cast<double>(t - t_min) / static_cast<double>(t_max - t_min);
    }
    std::int64_t unscale(double v) const {
        return t_min + std::llround(v * static_cast<double>(t_max - t_min));
    }
};

/// Snapshot of an EV used for prediction: battery, position, clock, trip
/// history, and the stations currently available to it.
struct EvState {
    double battery_pct = 100.0;
    int location = 0;
    std::vector<int> neighbors;
    std::int64_t timestamp = 0;
    std::vector<datagen::TripRecord> history;
    std::vector<int> available_stations;
};

struct Prediction {
    int next_location = 0;
    std::int64_t next_time = 0;
};

/// Parameter layout of the dual-head linear model: a location head
/// (n_locations x feature_dim matrix plus bias) and a scalar time head
/// (feature_dim weights plus bias), flattened row-major into one vector.
struct ModelLayout {
    int n_locations = datagen::kCommunityAreas;
    int feature_dim = 0;

    std::size_t dim() const {
        return static_cast<std::size_t>(n_locations) * feature_dim + n_locations +
               feature_dim + 1;
    }
    std::size_t loc_weight(int c, int f) const {
        return static_cast<std::size_t>(c) * feature_dim + f;
    }
    std::size_t loc_bias(int c) const {
        return static_cast<std::size_t>(n_locations) * feature_dim + c;
    }
    std::size_t time_weight(int f) const {
        return static_cast<std::size_t>(n_locations) * feature_dim + n_locations + f;
    }
    std::size_t time_bias() const { return dim() - 1; }

    bool operator==(const ModelLayout&) const = default;
};

struct DualTaskModel {
    ModelLayout layout;
    std::vector<double> params;

    std::uint64_t flops_per_sample() const;
};

std::vector<double> flatten(const DualTaskModel& model);
DualTaskModel unflatten(std::span<const double> weights, const ModelLayout& layout);

struct TrainSample {
    std::vector<double> x;
    int y_location = 0;
    double y_time = 0.0;  // scaled to [0,1]
};

// Feature encoding: [battery/100, one-hot location (77), scaled timestamp,
// trailing-window mean trip distance, trip count, mean inter-charge gap].
inline constexpr int kTripStatWindow = 10;
inline constexpr int kFeatureDim = 1 + datagen::kCommunityAreas + 1 + 3;

std::vector<double> encode_features(const EvState& state, const TimeScaler& scaler);

/// Turns a chronological trip sequence into supervised samples: one per trip
/// that still has a later charge event, labelled with that event's location
/// and (scaled) time.
std::vector<TrainSample> build_samples(std::span<const datagen::TripRecord> trips,
                                       const TimeScaler& scaler);

struct TrainOptions {
    int epochs = 3;
    double learning_rate = 0.05;
    double lambda_time = 1.0;  // weight of the time-regression loss term
    double w_max = 1048576.0;  // clip bound matching the ring codec
};

/// Combined loss: mean over samples of cross-entropy(location head) +
/// lambda * squared-error(time head). Writes the analytic gradient into
/// grad when non-null (same layout as params).
double loss_and_gradient(std::span<const double> params, const ModelLayout& layout,
                         std::span<const TrainSample> samples, double lambda_time,
                         std::vector<double>* grad);

/// Full-batch gradient-descent refinement of init_weights. Deterministic:
/// the rng is reserved for stochastic trainer variants and is not consumed
/// by the default full-batch path.
std::vector<double> train_local(std::span<const double> init_weights,
                                const ModelLayout& layout,
                                std::span<const TrainSample> samples,
                                const TrainOptions& opts, Rng& rng);

struct EvalResult {
    double loss = 0.0;
    double location_accuracy = 0.0;
    double time_mse = 0.0;  // on the scaled [0,1] axis
    std::size_t sample_count = 0;
};

EvalResult evaluate(std::span<const double> params, const ModelLayout& layout,
                    std::span<const TrainSample> samples, double lambda_time);

/// Dual-task prediction contract: battery at or below 20% means charging is
/// expected immediately at the current location; otherwise the forward pass
/// runs with the location argmax restricted to the available stations
/// (ties broken toward the lowest index) and the predicted time floored at
/// the state's clock.
Prediction predict_next(std::span<const double> params, const ModelLayout& layout,
                        const EvState& state, const TimeScaler& scaler);

}  // namespace hfltn::trainer
