#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskdp/errors.hpp"

namespace riskdp {

using StateIndex = std::int32_t;
using ActionIndex = std::int32_t;
using DisturbanceIndex = std::int32_t;
using Stage = std::int32_t;

/// Tolerance on Σ_w p[t][x][u][w] = 1.
inline constexpr double kKernelTolerance = 1e-12;

struct Dimensions {
    Stage horizon = 1;
    std::int32_t states = 1;
    std::int32_t actions = 1;
    std::int32_t disturbances = 1;
};

/**
 * Finite-horizon controlled Markov model
 *
 *   x_{t+1} = f_t(x_t, u_t, w_t),   w_t ~ p_t(. | x_t, u_t)
 *
 * with stage costs c_t(x, u) and terminal cost c_N(x). All tables are dense and
 * stored flat in [t][x][u][w] (resp. [t][x][u]) order.
 *
 * The constructor checks table shapes only. Content invariants (normalization,
 * index ranges, finiteness) are checked by validate_model() so that broken
 * models can still be built, inspected and reported on.
 */
class FiniteModel {
public:
    FiniteModel(Dimensions dims, std::vector<StateIndex> dynamics, std::vector<double> kernel,
                std::vector<double> stage_cost, std::vector<double> terminal_cost,
                std::vector<std::string> state_labels = {},
                std::vector<std::string> action_labels = {},
                std::vector<std::string> disturbance_labels = {});

    const Dimensions& dims() const noexcept { return dims_; }
    Stage horizon() const noexcept { return dims_.horizon; }
    std::int32_t num_states() const noexcept { return dims_.states; }
    std::int32_t num_actions() const noexcept { return dims_.actions; }
    std::int32_t num_disturbances() const noexcept { return dims_.disturbances; }

    StateIndex next_state(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w) const {
        return dynamics_[index4(t, x, u, w)];
    }
    double prob(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w) const {
        return kernel_[index4(t, x, u, w)];
    }
    double stage_cost(Stage t, StateIndex x, ActionIndex u) const {
        return stage_cost_[index3(t, x, u)];
    }
    double terminal_cost(StateIndex x) const { return terminal_cost_[static_cast<std::size_t>(x)]; }

    /// Successor states of (t, x, u) in disturbance order.
    std::span<const StateIndex> successors(Stage t, StateIndex x, ActionIndex u) const {
        return {dynamics_.data() + index4(t, x, u, 0), static_cast<std::size_t>(dims_.disturbances)};
    }
    /// Disturbance probabilities of (t, x, u) in disturbance order.
    std::span<const double> kernel_row(Stage t, StateIndex x, ActionIndex u) const {
        return {kernel_.data() + index4(t, x, u, 0), static_cast<std::size_t>(dims_.disturbances)};
    }

    const std::vector<StateIndex>& dynamics_table() const noexcept { return dynamics_; }
    const std::vector<double>& kernel_table() const noexcept { return kernel_; }
    const std::vector<double>& stage_cost_table() const noexcept { return stage_cost_; }
    const std::vector<double>& terminal_cost_table() const noexcept { return terminal_cost_; }

    const std::vector<std::string>& state_labels() const noexcept { return state_labels_; }
    const std::vector<std::string>& action_labels() const noexcept { return action_labels_; }
    const std::vector<std::string>& disturbance_labels() const noexcept { return disturbance_labels_; }

    std::size_t index4(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w) const noexcept {
        return ((static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u) * dims_.disturbances + w;
    }
    std::size_t index3(Stage t, StateIndex x, ActionIndex u) const noexcept {
        return (static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u;
    }

private:
    Dimensions dims_;
    std::vector<StateIndex> dynamics_;
    std::vector<double> kernel_;
    std::vector<double> stage_cost_;
    std::vector<double> terminal_cost_;
    std::vector<std::string> state_labels_;
    std::vector<std::string> action_labels_;
    std::vector<std::string> disturbance_labels_;
};

/// Mutable staging area for a FiniteModel. Every entry starts at zero
/// (dynamics map to state 0, all probabilities 0, all costs 0).
class ModelBuilder {
public:
    explicit ModelBuilder(Dimensions dims);

    ModelBuilder& transition(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w, StateIndex next,
                             double prob);
    ModelBuilder& stage_cost(Stage t, StateIndex x, ActionIndex u, double cost);
    ModelBuilder& terminal_cost(StateIndex x, double cost);
    ModelBuilder& state_labels(std::vector<std::string> labels);
    ModelBuilder& action_labels(std::vector<std::string> labels);
    ModelBuilder& disturbance_labels(std::vector<std::string> labels);

    FiniteModel build() const;

private:
    std::size_t index4(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w) const;
    std::size_t index3(Stage t, StateIndex x, ActionIndex u) const;

    Dimensions dims_;
    std::vector<StateIndex> dynamics_;
    std::vector<double> kernel_;
    std::vector<double> stage_cost_;
    std::vector<double> terminal_cost_;
    std::vector<std::string> state_labels_;
    std::vector<std::string> action_labels_;
    std::vector<std::string> disturbance_labels_;
};

/// Deterministic Markov policy: one action per (stage, state).
class MarkovPolicy {
public:
    MarkovPolicy(Stage horizon, std::int32_t states, std::vector<ActionIndex> actions);
    /// Constant policy taking `action` everywhere.
    static MarkovPolicy constant(Stage horizon, std::int32_t states, ActionIndex action = 0);

    ActionIndex operator()(Stage t, StateIndex x) const {
        return actions_[static_cast<std::size_t>(t) * states_ + x];
    }
    void set(Stage t, StateIndex x, ActionIndex u) { actions_[static_cast<std::size_t>(t) * states_ + x] = u; }

    Stage horizon() const noexcept { return horizon_; }
    std::int32_t num_states() const noexcept { return states_; }
    /// Flattened [t][x] table; lexicographic order on this is the policy order.
    const std::vector<ActionIndex>& table() const noexcept { return actions_; }

    friend bool operator==(const MarkovPolicy&, const MarkovPolicy&) = default;

private:
    Stage horizon_;
    std::int32_t states_;
    std::vector<ActionIndex> actions_;
};

/// Alternating state/action sequence x_0, u_0, ..., x_{N-1}, u_{N-1}, x_N.
struct Trajectory {
    std::vector<StateIndex> states;   // N + 1 entries
    std::vector<ActionIndex> actions; // N entries

    Stage horizon() const noexcept { return static_cast<Stage>(actions.size()); }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
    friend auto operator<=>(const Trajectory&, const Trajectory&) = default;
};

/// Next-state law q[t][x][u][x'] induced by pushing the disturbance law through the dynamics.
class TransitionKernel {
public:
    TransitionKernel(Dimensions dims, std::vector<double> q);

    double operator()(Stage t, StateIndex x, ActionIndex u, StateIndex next) const {
        return q_[((static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u) * dims_.states + next];
    }
    std::span<const double> row(Stage t, StateIndex x, ActionIndex u) const {
        return {q_.data() + ((static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u) * dims_.states,
                static_cast<std::size_t>(dims_.states)};
    }
    const Dimensions& dims() const noexcept { return dims_; }

private:
    Dimensions dims_;
    std::vector<double> q_;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate_model(const FiniteModel& m);

/// Throws InvalidModel if validate_model reports any violation.
void require_valid(const FiniteModel& m);

/// Throws std::invalid_argument unless the policy has shape N x |S| and valid actions.
void require_policy_shape(const FiniteModel& m, const MarkovPolicy& pi);

TransitionKernel pushforward(const FiniteModel& m);

/// Z = Σ_t c_t(x_t, u_t) + c_N(x_N).
double trajectory_cost(const FiniteModel& m, const Trajectory& traj);

/// Z_t = c_N(x_N) + Σ_{i=t}^{N-1} c_i(x_i, u_i), for 0 <= t <= N.
double cost_to_go(const FiniteModel& m, const Trajectory& traj, Stage t);

} // namespace riskdp
