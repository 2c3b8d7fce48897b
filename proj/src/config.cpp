#include "hfltn/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "hfltn/ring.hpp"

namespace hfltn::config {

const char* ablation_name(Ablation a) {
    switch (a) {
        case Ablation::kCappingRotating: return "capping_rotating";
        case Ablation::kSecretSharing: return "secret_sharing";
        case Ablation::kSecureAggregation: return "secure_aggregation";
        case Ablation::kNormalisation: return "normalisation";
    }
    return "?";
}

Ablation ablation_from_name(const std::string& name) {
    if (name == "capping_rotating") return Ablation::kCappingRotating;
    if (name == "secret_sharing") return Ablation::kSecretSharing;
    if (name == "secure_aggregation") return Ablation::kSecureAggregation;
    if (name == "normalisation") return Ablation::kNormalisation;
    throw ConfigInvalid("unknown ablation name: " + name);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigInvalid(key + ": expected boolean, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigInvalid(key + ": expected number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigInvalid(key + ": expected unsigned integer, got '" + v + "'");
    }
}

}  // namespace

KeyValues read_config_file(std::istream& is) {
    KeyValues entries;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigInvalid("line " + std::to_string(lineno) + ": expected key=value");
        }
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return entries;
}

ExperimentConfig build_config(const KeyValues& file_entries, const KeyValues& overrides) {
    ExperimentConfig cfg;
    bool have_n_evs = false;
    bool have_cap = false;

    const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
        setters = {
            {"n_evs",
             [&](const std::string& k, const std::string& v) {
                 cfg.n_evs = static_cast<std::uint32_t>(parse_uint(k, v));
                 have_n_evs = true;
             }},
            {"cap",
             [&](const std::string& k, const std::string& v) {
                 cfg.cap = static_cast<std::uint32_t>(parse_uint(k, v));
                 have_cap = true;
             }},
            {"epochs", [&](const std::string& k, const std::string& v) {
                 cfg.epochs = static_cast<std::uint32_t>(parse_uint(k, v)); }},
            {"seed", [&](const std::string& k, const std::string& v) {
                 cfg.seed = parse_uint(k, v); }},
            {"communities", [&](const std::string& k, const std::string& v) {
                 cfg.communities = static_cast<std::uint32_t>(parse_uint(k, v)); }},
            {"dccm", [&](const std::string& k, const std::string& v) {
                 cfg.dccm_enabled = parse_bool(k, v); }},
            {"crm", [&](const std::string& k, const std::string& v) {
                 cfg.crm_enabled = parse_bool(k, v); }},
            {"ablate",
             [&](const std::string&, const std::string& v) {
                 std::stringstream ss(v);
                 std::string item;
                 while (std::getline(ss, item, ',')) {
                     item = trim(item);
                     if (!item.empty()) cfg.ablations.insert(ablation_from_name(item));
                 }
             }},
            {"alpha", [&](const std::string& k, const std::string& v) {
                 cfg.alpha = parse_real(k, v); }},
            {"tau", [&](const std::string& k, const std::string& v) {
                 cfg.tau = parse_real(k, v); }},
            {"k_transitory", [&](const std::string& k, const std::string& v) {
                 cfg.k_transitory = static_cast<std::uint16_t>(parse_uint(k, v)); }},
            {"per_client_flops", [&](const std::string& k, const std::string& v) {
                 cfg.per_client_flops = parse_uint(k, v); }},
            {"scale_bits", [&](const std::string& k, const std::string& v) {
                 cfg.scale_bits = static_cast<unsigned>(parse_uint(k, v)); }},
            {"w_max", [&](const std::string& k, const std::string& v) {
                 cfg.w_max = parse_real(k, v); }},
            {"days", [&](const std::string& k, const std::string& v) {
                 cfg.days = static_cast<std::uint32_t>(parse_uint(k, v)); }},
            {"trips_per_day", [&](const std::string& k, const std::string& v) {
                 cfg.trips_per_day = parse_real(k, v); }},
            {"mean_trip_km", [&](const std::string& k, const std::string& v) {
                 cfg.mean_trip_km = parse_real(k, v); }},
            {"transitory_fraction", [&](const std::string& k, const std::string& v) {
                 cfg.transitory_fraction = parse_real(k, v); }},
            {"local_epochs", [&](const std::string& k, const std::string& v) {
                 cfg.local_epochs = static_cast<int>(parse_uint(k, v)); }},
            {"learning_rate", [&](const std::string& k, const std::string& v) {
                 cfg.learning_rate = parse_real(k, v); }},
            {"lambda_time", [&](const std::string& k, const std::string& v) {
                 cfg.lambda_time = parse_real(k, v); }},
            {"flops_per_ms", [&](const std::string& k, const std::string& v) {
                 cfg.flops_per_ms = parse_real(k, v); }},
            {"agg_ms_per_contribution", [&](const std::string& k, const std::string& v) {
                 cfg.agg_ms_per_contribution = parse_real(k, v); }},
            {"parallel", [&](const std::string& k, const std::string& v) {
                 cfg.parallel = parse_bool(k, v); }},
            {"out", [&](const std::string&, const std::string& v) { cfg.out_dir = v; }},
        };

    auto apply = [&](const KeyValues& entries) {
        for (const auto& [key, value] : entries) {
            auto it = setters.find(key);
            if (it == setters.end()) {
                throw ConfigInvalid("unknown config key: " + key);
            }
            it->second(key, value);
        }
    };
    apply(file_entries);
    apply(overrides);

    if (!have_n_evs || cfg.n_evs == 0) {
        throw ConfigInvalid("n_evs: required and must be >= 1");
    }
    if (!have_cap) {
        cfg.cap = std::min<std::uint32_t>(cfg.cap, cfg.n_evs);
    }
    if (cfg.cap == 0) throw ConfigInvalid("cap: must be >= 1");
    if (cfg.dccm_enabled && !cfg.ablated(Ablation::kCappingRotating) && cfg.cap > cfg.n_evs) {
        throw ConfigInvalid("cap: must be <= n_evs when dccm is enabled");
    }
    if (cfg.epochs == 0) throw ConfigInvalid("epochs: must be >= 1");
    if (cfg.communities == 0) throw ConfigInvalid("communities: must be >= 1");
    if (cfg.tau <= 0.0) throw ConfigInvalid("tau: must be positive");
    if (cfg.k_transitory < 2) throw ConfigInvalid("k_transitory: must be >= 2");
    if (cfg.scale_bits == 0 || cfg.scale_bits > 48) {
        throw ConfigInvalid("scale_bits: must be in [1,48]");
    }
    if (cfg.w_max <= 0.0) throw ConfigInvalid("w_max: must be positive");
    if (cfg.transitory_fraction < 0.0 || cfg.transitory_fraction > 1.0) {
        throw ConfigInvalid("transitory_fraction: must be in [0,1]");
    }
    if (cfg.days == 0) throw ConfigInvalid("days: must be >= 1");
    if (cfg.learning_rate <= 0.0) throw ConfigInvalid("learning_rate: must be positive");
    if (cfg.flops_per_ms <= 0.0) throw ConfigInvalid("flops_per_ms: must be positive");

    ring::FixedPointCodec codec{cfg.scale_bits, cfg.w_max};
    if (cfg.n_evs > codec.max_clients()) {
        throw ConfigInvalid("n_evs: " + std::to_string(cfg.n_evs) +
                            " clients overflow the ring headroom (max " +
                            std::to_string(codec.max_clients()) + " at these codec settings)");
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path, const KeyValues& overrides) {
    KeyValues file_entries;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigInvalid("config: cannot open file " + path);
        }
        file_entries = read_config_file(in);
    }
    return build_config(file_entries, overrides);
}

void echo_resolved(const ExperimentConfig& cfg, std::ostream& os) {
    char buf[64];
    auto real = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "n_evs=" << cfg.n_evs << '\n'
       << "cap=" << cfg.cap << '\n'
       << "epochs=" << cfg.epochs << '\n'
       << "seed=" << cfg.seed << '\n'
       << "communities=" << cfg.communities << '\n'
       << "dccm=" << (cfg.dccm_enabled ? "true" : "false") << '\n'
       << "crm=" << (cfg.crm_enabled ? "true" : "false") << '\n';
    if (!cfg.ablations.empty()) {
        os << "ablate=";
        bool first = true;
        for (auto a : cfg.ablations) {
            if (!first) os << ',';
            os << ablation_name(a);
            first = false;
        }
        os << '\n';
    }
    os << "alpha=" << real(cfg.alpha) << '\n'
       << "tau=" << real(cfg.tau) << '\n'
       << "k_transitory=" << cfg.k_transitory << '\n'
       << "per_client_flops=" << cfg.per_client_flops << '\n'
       << "scale_bits=" << cfg.scale_bits << '\n'
       << "w_max=" << real(cfg.w_max) << '\n'
       << "days=" << cfg.days << '\n'
       << "trips_per_day=" << real(cfg.trips_per_day) << '\n'
       << "mean_trip_km=" << real(cfg.mean_trip_km) << '\n'
       << "transitory_fraction=" << real(cfg.transitory_fraction) << '\n'
       << "local_epochs=" << cfg.local_epochs << '\n'
       << "learning_rate=" << real(cfg.learning_rate) << '\n'
       << "lambda_time=" << real(cfg.lambda_time) << '\n'
       << "flops_per_ms=" << real(cfg.flops_per_ms) << '\n'
       << "agg_ms_per_contribution=" << real(cfg.agg_ms_per_contribution) << '\n'
       << "parallel=" << (cfg.parallel ? "true" : "false") << '\n';
    if (!cfg.out_dir.empty()) {
        os << "out=" << cfg.out_dir << '\n';
    }
}

}  // namespace hfltn::config
