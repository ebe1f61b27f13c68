#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "riskdp/evaluator.hpp"
#include "riskdp/model.hpp"
#include "riskdp/risk.hpp"

namespace riskdp {

struct OracleCaps {
    /// Limit on |A|^(|S| N) Markov policies.
    std::uint64_t max_markov_policies = 1'000'000;
    /// Limit on the number of history-dependent policies.
    std::uint64_t max_history_policies = 100'000;
    /// Leaf limit for the trajectory-tree expansion in the history oracle.
    std::uint64_t max_leaves = 1'000'000;
};

/// Values within this distance of the best value belong to the argmin set.
inline constexpr double kArgminTolerance = 1e-10;
inline constexpr double kCertifyTolerance = 1e-9;

/// Deterministic history-dependent policy. The action at stage t depends on the
/// full state history (x_0, ..., x_t); histories are indexed in mixed radix |S|
/// with x_0 most significant.
class HistoryPolicy {
public:
    HistoryPolicy(Stage horizon, std::int32_t states, std::vector<ActionIndex> actions);

    ActionIndex operator()(std::span<const StateIndex> history) const;

    /// Number of table entries: Σ_{t=0}^{N-1} |S|^{t+1}.
    static std::uint64_t table_size(Stage horizon, std::int32_t states);
    const std::vector<ActionIndex>& table() const noexcept { return actions_; }

private:
    Stage horizon_;
    std::int32_t states_;
    std::vector<std::size_t> stage_offset_;
    std::vector<ActionIndex> actions_;
};

struct MarkovOracleResult {
    double best_value;
    /// Every policy within kArgminTolerance of the best, in lexicographic order.
    std::vector<MarkovPolicy> optimal_policies;
};

/// Number of Markov policies |A|^(|S| N), saturated at UINT64_MAX.
std::uint64_t markov_policy_count(const FiniteModel& m);
/// Number of history-dependent policies, saturated at UINT64_MAX.
std::uint64_t history_policy_count(const FiniteModel& m);

/// Evaluates every deterministic Markov policy with evaluate_policy, in
/// lexicographic order of the flattened [t][x] action table.
MarkovOracleResult brute_force_markov(const FiniteModel& m, const RiskParam& rp, StateIndex x0,
                                      const OracleCaps& caps = {});

/// Exponential-utility cost of a history-dependent policy by expanding the full
/// trajectory tree from x0 and applying entropic_risk to the resulting cost law.
double evaluate_history_policy(const FiniteModel& m, const HistoryPolicy& policy, const RiskParam& rp, StateIndex x0,
                               const OracleCaps& caps = {});

/// Minimum over all deterministic history-dependent policies.
double brute_force_history(const FiniteModel& m, const RiskParam& rp, StateIndex x0, const OracleCaps& caps = {});

struct Certificate {
    double dp_value;
    double markov_value;
    double history_value;
    double max_gap;
    bool dp_policy_optimal; // DP policy is in the Markov argmin set
    bool pass;
};

/// Compares backward induction against both brute-force oracles. PASS iff all
/// pairwise gaps are <= 1e-9 and the DP policy is in the argmin set.
Certificate certify(const FiniteModel& m, const RiskParam& rp, StateIndex x0, const OracleCaps& caps = {});

} // namespace riskdp
