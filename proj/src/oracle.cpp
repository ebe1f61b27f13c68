#include "riskdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskdp/solver.hpp"

namespace riskdp {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp && r != kSaturated; ++i) r = saturating_mul(r, base);
    return r;
}

// Advances a mixed-radix counter with the last digit fastest; false on wrap-around.
bool next_table(std::vector<ActionIndex>& digits, ActionIndex radix) {
    for (std::size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < radix) return true;
        digits[i] = 0;
    }
    return false;
}

} // namespace

HistoryPolicy::HistoryPolicy(Stage horizon, std::int32_t states, std::vector<ActionIndex> actions)
    : horizon_(horizon), states_(states), actions_(std::move(actions)) {
    std::size_t offset = 0;
    std::size_t width = 1;
    for (Stage t = 0; t < horizon_; ++t) {
        width *= static_cast<std::size_t>(states_);
        stage_offset_.push_back(offset);
        offset += width;
    }
    if (actions_.size() != offset) throw std::invalid_argument("history policy table has wrong size");
}

ActionIndex HistoryPolicy::operator()(std::span<const StateIndex> history) const {
    if (history.empty() || history.size() > static_cast<std::size_t>(horizon_))
        throw std::out_of_range("history length out of range");
    std::size_t index = 0;
    for (StateIndex x : history) index = index * static_cast<std::size_t>(states_) + static_cast<std::size_t>(x);
    return actions_[stage_offset_[history.size() - 1] + index];
}

std::uint64_t HistoryPolicy::table_size(Stage horizon, std::int32_t states) {
    std::uint64_t total = 0;
    std::uint64_t width = 1;
    for (Stage t = 0; t < horizon; ++t) {
        width = saturating_mul(width, static_cast<std::uint64_t>(states));
        total = (total > kSaturated - width) ? kSaturated : total + width;
    }
    return total;
}

std::uint64_t markov_policy_count(const FiniteModel& m) {
    return saturating_pow(static_cast<std::uint64_t>(m.num_actions()),
                          static_cast<std::uint64_t>(m.num_states()) * static_cast<std::uint64_t>(m.horizon()));
}

std::uint64_t history_policy_count(const FiniteModel& m) {
    return saturating_pow(static_cast<std::uint64_t>(m.num_actions()), HistoryPolicy::table_size(m.horizon(), m.num_states()));
}

MarkovOracleResult brute_force_markov(const FiniteModel& m, const RiskParam& rp, StateIndex x0, const OracleCaps& caps) {
    require_valid(m);
    if (x0 < 0 || x0 >= m.num_states()) throw std::out_of_range("initial state out of range");
    const auto count = markov_policy_count(m);
    if (count > caps.max_markov_policies)
        throw CapExceeded("Markov policy count exceeds cap " + std::to_string(caps.max_markov_policies));

    std::vector<ActionIndex> table(static_cast<std::size_t>(m.horizon()) * m.num_states(), 0);
    std::vector<std::pair<std::vector<ActionIndex>, double>> evaluated;
    evaluated.reserve(static_cast<std::size_t>(count));
    double best = std::numeric_limits<double>::infinity();
    do {
        const MarkovPolicy pi(m.horizon(), m.num_states(), table);
        const double v = evaluate_policy(m, pi, rp, x0);
        best = std::min(best, v);
        evaluated.emplace_back(table, v);
    } while (next_table(table, m.num_actions()));

    MarkovOracleResult result{best, {}};
    for (auto& [actions, v] : evaluated)
        if (v - best <= kArgminTolerance) result.optimal_policies.emplace_back(m.horizon(), m.num_states(), std::move(actions));
    return result;
}

double evaluate_history_policy(const FiniteModel& m, const HistoryPolicy& policy, const RiskParam& rp, StateIndex x0,
                               const OracleCaps& caps) {
    check_leaf_cap(m, 0, EnumerationCaps{caps.max_leaves});
    std::vector<CostAtom> atoms;
    std::vector<StateIndex> history{x0};
    std::vector<ActionIndex> actions;

    auto expand = [&](auto&& self, Stage t, double prob) -> void {
        if (t == m.horizon()) {
            double z = m.terminal_cost(history.back());
            for (Stage i = t - 1; i >= 0; --i) z = m.stage_cost(i, history[i], actions[i]) + z;
            atoms.push_back({z, prob});
            return;
        }
        const StateIndex xt = history.back();
        const ActionIndex u = policy(history);
        const auto next = m.successors(t, xt, u);
        const auto probs = m.kernel_row(t, xt, u);
        actions.push_back(u);
        for (std::size_t w = 0; w < next.size(); ++w) {
            if (probs[w] <= 0.0) continue;
            history.push_back(next[w]);
            self(self, t + 1, prob * probs[w]);
            history.pop_back();
        }
        actions.pop_back();
    };
    expand(expand, 0, 1.0);
    return entropic_risk(CostDistribution(std::move(atoms), 1e-10), rp);
}

double brute_force_history(const FiniteModel& m, const RiskParam& rp, StateIndex x0, const OracleCaps& caps) {
    require_valid(m);
    if (x0 < 0 || x0 >= m.num_states()) throw std::out_of_range("initial state out of range");
    if (history_policy_count(m) > caps.max_history_policies)
        throw CapExceeded("history policy count exceeds cap " + std::to_string(caps.max_history_policies));
    check_leaf_cap(m, 0, EnumerationCaps{caps.max_leaves});

    std::vector<ActionIndex> table(static_cast<std::size_t>(HistoryPolicy::table_size(m.horizon(), m.num_states())), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        const HistoryPolicy policy(m.horizon(), m.num_states(), table);
        best = std::min(best, evaluate_history_policy(m, policy, rp, x0, caps));
    } while (next_table(table, m.num_actions()));
    return best;
}

Certificate certify(const FiniteModel& m, const RiskParam& rp, StateIndex x0, const OracleCaps& caps) {
    require_valid(m);
    if (markov_policy_count(m) > caps.max_markov_policies)
        throw CapExceeded("Markov policy count exceeds cap " + std::to_string(caps.max_markov_policies));
    if (history_policy_count(m) > caps.max_history_policies)
        throw CapExceeded("history policy count exceeds cap " + std::to_string(caps.max_history_policies));

    const auto dp = solve_exputil(m, rp, SolveOptions{.keep_q_values = false});
    const auto markov = brute_force_markov(m, rp, x0, caps);
    const double history = brute_force_history(m, rp, x0, caps);

    Certificate c{};
    c.dp_value = dp.values(0, x0);
    c.markov_value = markov.best_value;
    c.history_value = history;
    c.max_gap = std::max({std::abs(c.dp_value - c.markov_value), std::abs(c.dp_value - c.history_value),
                          std::abs(c.markov_value - c.history_value)});
    c.dp_policy_optimal = std::find(markov.optimal_policies.begin(), markov.optimal_policies.end(), dp.policy) !=
                          markov.optimal_policies.end();
    c.pass = c.max_gap <= kCertifyTolerance && c.dp_policy_optimal;
    return c;
}

} // namespace riskdp
