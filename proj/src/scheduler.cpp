#include "hfltn/scheduler.hpp"

#include <algorithm>

namespace hfltn::scheduler {

std::vector<ClientId> rotate(std::span<const ClientId> roster, Round t, std::uint32_t cap) {
    if (roster.empty()) {
        throw EmptyRoster("rotate over empty roster");
    }
    const std::size_t n = roster.size();
    const std::size_t take = std::min<std::size_t>(cap, n);
    std::vector<ClientId> active;
    active.reserve(take);
    const std::size_t start = (static_cast<std::size_t>(t) * cap) % n;
    for (std::size_t j = 0; j < take; ++j) {
        active.push_back(roster[(start + j) % n]);
    }
    return active;
}

double per_epoch_diversity(std::size_t active_count, std::size_t n_total) {
    return static_cast<double>(active_count) / static_cast<double>(n_total);
}

double cumulative_diversity(std::size_t history_count, std::size_t n_total) {
    return static_cast<double>(history_count) / static_cast<double>(n_total);
}

std::uint64_t flops_for_round(std::uint64_t active_count, std::uint64_t per_client_flops) {
    return active_count * per_client_flops;
}

RoundScheduler::RoundScheduler(std::vector<ClientId> roster, std::uint32_t cap,
                               bool dccm_enabled, bool crm_enabled)
    : roster_(std::move(roster)),
      effective_cap_(dccm_enabled ? cap : static_cast<std::uint32_t>(roster_.size())),
      crm_enabled_(crm_enabled) {
    if (roster_.empty()) {
        throw EmptyRoster("scheduler requires a non-empty roster");
    }
    std::sort(roster_.begin(), roster_.end());
}

RoundSchedule RoundScheduler::advance() {
    const Round t = next_round_++;
    const Round window = crm_enabled_ ? t : 0;
    RoundSchedule s;
    s.n_total = roster_.size();
    s.cap = effective_cap_;
    s.round = t;
    s.active = rotate(roster_, window, effective_cap_);
    for (ClientId id : s.active) {
        history_.insert(id);
    }
    s.history_count = history_.size();
    return s;
}

}  // namespace hfltn::scheduler
