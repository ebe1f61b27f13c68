#pragma once

#include <optional>
#include <vector>

#include "riskdp/model.hpp"
#include "riskdp/risk.hpp"

namespace riskdp {

/// Stage value functions v[t][x] for t = 0..N.
class ValueTables {
public:
    ValueTables(Stage horizon, std::int32_t states)
        : horizon_(horizon), states_(states),
          v_(static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(states), 0.0) {}

    double operator()(Stage t, StateIndex x) const { return v_[static_cast<std::size_t>(t) * states_ + x]; }
    double& at(Stage t, StateIndex x) { return v_[static_cast<std::size_t>(t) * states_ + x]; }

    Stage horizon() const noexcept { return horizon_; }
    std::int32_t num_states() const noexcept { return states_; }

    friend bool operator==(const ValueTables&, const ValueTables&) = default;

private:
    Stage horizon_;
    std::int32_t states_;
    std::vector<double> v_;
};

/// Minimand table q[t][x][u] = c_t(x,u) + (expected or risk-adjusted) cost-to-go.
class StageQValues {
public:
    StageQValues(Stage horizon, std::int32_t states, std::int32_t actions)
        : states_(states), actions_(actions),
          q_(static_cast<std::size_t>(horizon) * static_cast<std::size_t>(states) * actions, 0.0) {}

    double operator()(Stage t, StateIndex x, ActionIndex u) const { return q_[index(t, x, u)]; }
    double& at(Stage t, StateIndex x, ActionIndex u) { return q_[index(t, x, u)]; }

    friend bool operator==(const StageQValues&, const StageQValues&) = default;

private:
    std::size_t index(Stage t, StateIndex x, ActionIndex u) const {
        return (static_cast<std::size_t>(t) * states_ + x) * actions_ + u;
    }
    std::int32_t states_;
    std::int32_t actions_;
    std::vector<double> q_;
};

struct SolveOptions {
    /// Retain the per-(t,x,u) minimand; disable for large models.
    bool keep_q_values = true;
};

struct SolveResult {
    ValueTables values;
    MarkovPolicy policy;
    /// Empty for the risk-neutral solver.
    std::optional<RiskParam> theta;
    std::optional<StageQValues> stage_q_values;
};

/**
 * Exponential-utility backward induction.
 *
 * v[N][x] = c_N(x), and for t = N-1, ..., 0
 *
 *   q(x,u)  = c_t(x,u) + (-2/θ) log Σ_w p_t(w|x,u) exp((-θ/2) v[t+1][f_t(x,u,w)])
 *   v[t][x] = min_u q(x,u)
 *
 * The log-sum-exp is shifted by the largest successor value over disturbances
 * with positive probability. The policy keeps the smallest minimizing action.
 */
SolveResult solve_exputil(const FiniteModel& m, const RiskParam& rp, const SolveOptions& options = {});

/// Standard expected-cost Bellman recursion with the same tie-breaking.
SolveResult solve_risk_neutral(const FiniteModel& m, const SolveOptions& options = {});

struct SweepRow {
    RiskParam theta;
    double value;
    MarkovPolicy policy;
    bool policy_changed; // relative to the previous row; false on the first row
};

/// One solve per θ. Throws std::invalid_argument unless `thetas` is non-empty and
/// strictly ascending.
std::vector<SweepRow> theta_sweep(const FiniteModel& m, const std::vector<RiskParam>& thetas, StateIndex x0);

} // namespace riskdp
