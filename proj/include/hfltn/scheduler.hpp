#pragma once

#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "hfltn/errors.hpp"

namespace hfltn::scheduler {

using ClientId = std::uint32_t;
using Round = std::uint32_t;

/// Active set for one round: C_t = { roster[(t*cap + j) mod N] } for
/// j in [0, min(cap, N)). Consecutive rounds are disjoint until the ring
/// wraps, which makes a full rotation cover every client in ceil(N/cap)
/// rounds. Roster must be sorted by client id.
std::vector<ClientId> rotate(std::span<const ClientId> roster, Round t, std::uint32_t cap);

double per_epoch_diversity(std::size_t active_count, std::size_t n_total);
double cumulative_diversity(std::size_t history_count, std::size_t n_total);

std::uint64_t flops_for_round(std::uint64_t active_count, std::uint64_t per_client_flops);

struct RoundSchedule {
    std::size_t n_total = 0;
    std::uint32_t cap = 0;
    Round round = 0;
    std::vector<ClientId> active;
    std::size_t history_count = 0;  // distinct clients activated so far

    double per_epoch_ratio() const { return per_epoch_diversity(active.size(), n_total); }
    double cumulative_ratio() const { return cumulative_diversity(history_count, n_total); }
};

struct DiversityReport {
    double per_epoch_ratio = 0.0;
    double cumulative_ratio = 0.0;
    double loss_decrease_rate_pct = 0.0;
    double generalization_gap_pct = 0.0;
};

/// Stateful round-by-round scheduler. With DCCM off the cap is the full
/// roster; with CRM off every round reuses the round-0 window, so the
/// history stops growing after the first round.
class RoundScheduler {
public:
    RoundScheduler(std::vector<ClientId> roster, std::uint32_t cap,
                   bool dccm_enabled, bool crm_enabled);

    RoundSchedule advance();

    const std::vector<ClientId>& roster() const { return roster_; }
    std::uint32_t effective_cap() const { return effective_cap_; }
    std::size_t history_count() const { return history_.size(); }

private:
    std::vector<ClientId> roster_;
    std::uint32_t effective_cap_;
    bool crm_enabled_;
    Round next_round_ = 0;
    std::unordered_set<ClientId> history_;
};

}  // namespace hfltn::scheduler
