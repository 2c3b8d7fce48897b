#include "hfltn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hfltn::trainer {

namespace {

constexpr double kDistanceScaleKm = 50.0;
constexpr double kGapScaleSeconds = 7.0 * 86400.0;

struct TripWindowStats {
    double mean_distance = 0.0;
    double trip_count = 0.0;
    double mean_charge_gap = 0.0;
};

TripWindowStats window_stats(std::span<const datagen::TripRecord> history) {
    TripWindowStats st;
    if (history.empty()) return st;
    const std::size_t w = std::min<std::size_t>(kTripStatWindow, history.size());
    const auto window = history.subspan(history.size() - w, w);
    double dist = 0.0;
    std::vector<std::int64_t> charges;
    for (const auto& r : window) {
        dist += r.distance_km;
        if (r.charge_event) charges.push_back(r.charge_time);
    }
    st.mean_distance = dist / static_cast<double>(w) / kDistanceScaleKm;
    st.trip_count = static_cast<double>(w) / kTripStatWindow;
    if (charges.size() >= 2) {
        double gap = 0.0;
        for (std::size_t i = 1; i < charges.size(); ++i) {
            gap += static_cast<double>(charges[i] - charges[i - 1]);
        }
        st.mean_charge_gap = gap / static_cast<double>(charges.size() - 1) / kGapScaleSeconds;
    }
    return st;
}

}  // namespace

std::uint64_t DualTaskModel::flops_per_sample() const {
    const auto n = static_cast<std::uint64_t>(layout.n_locations);
    const auto f = static_cast<std::uint64_t>(layout.feature_dim);
    // location head matvec + softmax + time head dot
    return 2 * n * f + 5 * n + 2 * f + 2;
}

std::vector<double> flatten(const DualTaskModel& model) {
    if (model.params.size() != model.layout.dim()) {
        throw LayoutMismatch("model holds " + std::to_string(model.params.size()) +
                             " params, layout expects " + std::to_string(model.layout.dim()));
    }
    return model.params;
}

DualTaskModel unflatten(std::span<const double> weights, const ModelLayout& layout) {
    if (weights.size() != layout.dim()) {
        throw LayoutMismatch("vector of dim " + std::to_string(weights.size()) +
                             " does not fit layout dim " + std::to_string(layout.dim()));
    }
    DualTaskModel m;
    m.layout = layout;
    m.params.assign(weights.begin(), weights.end());
    return m;
}

std::vector<double> encode_features(const EvState& state, const TimeScaler& scaler) {
    std::vector<double> x(kFeatureDim, 0.0);
    x[0] = state.battery_pct / 100.0;
    x[1 + state.location] = 1.0;
    x[1 + datagen::kCommunityAreas] = scaler.scale(state.timestamp);
    const auto st = window_stats(state.history);
    x[2 + datagen::kCommunityAreas] = st.mean_distance;
    x[3 + datagen::kCommunityAreas] = st.trip_count;
    x[4 + datagen::kCommunityAreas] = st.mean_charge_gap;
    return x;
}

std::vector<TrainSample> build_samples(std::span<const datagen::TripRecord> trips,
                                       const TimeScaler& scaler) {
    std::vector<TrainSample> samples;
    // Next charge event at or after each position, scanned once from the end.
    std::vector<std::ptrdiff_t> next_charge(trips.size(), -1);
    std::ptrdiff_t next = -1;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(trips.size()) - 1; i >= 0; --i) {
        next_charge[i] = next;
        if (trips[i].charge_event) next = i;
    }
    for (std::size_t i = 0; i < trips.size(); ++i) {
        const auto j = next_charge[i];
        if (j < 0) continue;
        const auto& cur = trips[i];
        EvState state;
        state.battery_pct = cur.charge_event ? 100.0 : cur.battery_pct_after;
        state.location = cur.dropoff_community;
        state.timestamp = cur.charge_event ? cur.charge_time : cur.start_time;
        state.history.assign(trips.begin(), trips.begin() + i + 1);
        TrainSample s;
        s.x = encode_features(state, scaler);
        s.y_location = trips[j].dropoff_community;
        s.y_time = scaler.scale(trips[j].charge_time);
        samples.push_back(std::move(s));
    }
    return samples;
}

double loss_and_gradient(std::span<const double> params, const ModelLayout& layout,
                         std::span<const TrainSample> samples, double lambda_time,
                         std::vector<double>* grad) {
    if (samples.empty()) {
        throw EmptyDataset("loss over empty sample set");
    }
    const int nloc = layout.n_locations;
    const int nf = layout.feature_dim;
    if (grad) {
        grad->assign(layout.dim(), 0.0);
    }
    std::vector<double> logits(nloc);
    std::vector<double> probs(nloc);
    double loss = 0.0;
    const double inv_m = 1.0 / static_cast<double>(samples.size());

    for (const auto& s : samples) {
        for (int c = 0; c < nloc; ++c) {
            double z = params[layout.loc_bias(c)];
            const double* w = params.data() + layout.loc_weight(c, 0);
            for (int f = 0; f < nf; ++f) {
                z += w[f] * s.x[f];
            }
            logits[c] = z;
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        double zsum = 0.0;
        for (int c = 0; c < nloc; ++c) {
            probs[c] = std::exp(logits[c] - zmax);
            zsum += probs[c];
        }
        for (int c = 0; c < nloc; ++c) probs[c] /= zsum;
        loss -= std::log(std::max(probs[s.y_location], 1e-300)) * inv_m;

        double t_hat = params[layout.time_bias()];
        {
            const double* w = params.data() + layout.time_weight(0);
            for (int f = 0; f < nf; ++f) {
                t_hat += w[f] * s.x[f];
            }
        }
        const double dt = t_hat - s.y_time;
        loss += lambda_time * dt * dt * inv_m;

        if (grad) {
            for (int c = 0; c < nloc; ++c) {
                const double dz = (probs[c] - (c == s.y_location ? 1.0 : 0.0)) * inv_m;
                double* gw = grad->data() + layout.loc_weight(c, 0);
                for (int f = 0; f < nf; ++f) {
                    gw[f] += dz * s.x[f];
                }
                (*grad)[layout.loc_bias(c)] += dz;
            }
            const double dts = 2.0 * lambda_time * dt * inv_m;
            double* gw = grad->data() + layout.time_weight(0);
            for (int f = 0; f < nf; ++f) {
                gw[f] += dts * s.x[f];
            }
            (*grad)[layout.time_bias()] += dts;
        }
    }
    return loss;
}

std::vector<double> train_local(std::span<const double> init_weights,
                                const ModelLayout& layout,
                                std::span<const TrainSample> samples,
                                const TrainOptions& opts, Rng& rng) {
    (void)rng;
    if (samples.empty()) {
        throw EmptyDataset("train_local on empty dataset");
    }
    if (init_weights.size() != layout.dim()) {
        throw LayoutMismatch("init weights dim " + std::to_string(init_weights.size()) +
                             " vs layout " + std::to_string(layout.dim()));
    }
    std::vector<double> w(init_weights.begin(), init_weights.end());
    std::vector<double> grad;
    for (int e = 0; e < opts.epochs; ++e) {
        const double loss = loss_and_gradient(w, layout, samples, opts.lambda_time, &grad);
        if (!std::isfinite(loss)) {
            throw DivergedLoss("non-finite training loss at epoch " + std::to_string(e));
        }
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] -= opts.learning_rate * grad[i];
        }
    }
    for (auto& v : w) {
        v = std::clamp(v, -opts.w_max, opts.w_max);
        if (!std::isfinite(v)) {
            throw DivergedLoss("non-finite weight after training");
        }
    }
    return w;
}

EvalResult evaluate(std::span<const double> params, const ModelLayout& layout,
                    std::span<const TrainSample> samples, double lambda_time) {
    EvalResult r;
    r.sample_count = samples.size();
    if (samples.empty()) return r;
    const int nloc = layout.n_locations;
    const int nf = layout.feature_dim;
    std::vector<double> logits(nloc);
    std::size_t hits = 0;
    double mse = 0.0;
    const double inv_m = 1.0 / static_cast<double>(samples.size());
    for (const auto& s : samples) {
        for (int c = 0; c < nloc; ++c) {
            double z = params[layout.loc_bias(c)];
            const double* w = params.data() + layout.loc_weight(c, 0);
            for (int f = 0; f < nf; ++f) z += w[f] * s.x[f];
            logits[c] = z;
        }
        const double zmax = *std::max_element(logits.begin(), logits.end());
        double zsum = 0.0;
        for (int c = 0; c < nloc; ++c) zsum += std::exp(logits[c] - zmax);
        const double logp = logits[s.y_location] - zmax - std::log(zsum);
        r.loss -= logp * inv_m;
        int best = 0;
        for (int c = 1; c < nloc; ++c) {
            if (logits[c] > logits[best]) best = c;
        }
        if (best == s.y_location) ++hits;

        double t_hat = params[layout.time_bias()];
        const double* w = params.data() + layout.time_weight(0);
        for (int f = 0; f < nf; ++f) t_hat += w[f] * s.x[f];
        const double dt = t_hat - s.y_time;
        mse += dt * dt * inv_m;
    }
    r.loss += lambda_time * mse;
    r.location_accuracy = static_cast<double>(hits) * inv_m;
    r.time_mse = mse;
    return r;
}

Prediction predict_next(std::span<const double> params, const ModelLayout& layout,
                        const EvState& state, const TimeScaler& scaler) {
    if (state.battery_pct <= datagen::kChargeThresholdPct) {
        // Charging is expected immediately at the current location.
        return {state.location, state.timestamp};
    }
    const auto x = encode_features(state, scaler);
    const int nf = layout.feature_dim;

    std::vector<int> stations(state.available_stations);
    std::sort(stations.begin(), stations.end());
    int best = stations.front();
    double best_z = -std::numeric_limits<double>::infinity();
    for (int c : stations) {
        double z = params[layout.loc_bias(c)];
        const double* w = params.data() + layout.loc_weight(c, 0);
        for (int f = 0; f < nf; ++f) z += w[f] * x[f];
        if (z > best_z) {
            best_z = z;
            best = c;
        }
    }

    double t_hat = params[layout.time_bias()];
    const double* w = params.data() + layout.time_weight(0);
    for (int f = 0; f < nf; ++f) t_hat += w[f] * x[f];
    const std::int64_t t = std::max(state.timestamp, scaler.unscale(t_hat));
    return {best, t};
}

}  // namespace hfltn::trainer
