#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "riskdp/model.hpp"
#include "riskdp/risk.hpp"

namespace riskdp {

struct EnumerationCaps {
    /// Upper bound on |D|^N leaves of the trajectory tree.
    std::uint64_t max_leaves = 1'000'000;
};

/// Law of the trajectory under a fixed policy and initial state, restricted to its
/// support. Entries are distinct and sorted by trajectory.
struct TrajectoryDistribution {
    std::vector<std::pair<Trajectory, double>> entries;
};

/// W_t(x) = E[exp((-θ/2) Z_t) | X_t = x] under a fixed policy. Stored as the
/// certainty equivalent (-2/θ) log W so that large costs do not overflow.
class WTables {
public:
    WTables(Stage horizon, std::int32_t states, double exponent_scale)
        : states_(states), scale_(exponent_scale),
          ce_(static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(states), 0.0) {}

    /// (-2/θ) log W_t(x), the certainty-equivalent cost-to-go.
    double certainty_equivalent(Stage t, StateIndex x) const { return ce_[static_cast<std::size_t>(t) * states_ + x]; }
    double& certainty_equivalent_at(Stage t, StateIndex x) { return ce_[static_cast<std::size_t>(t) * states_ + x]; }
    double log_w(Stage t, StateIndex x) const { return scale_ * certainty_equivalent(t, x); }
    /// exp(log W); overflows to +inf for very large costs, use log_w() there.
    double w(Stage t, StateIndex x) const;

private:
    std::int32_t states_;
    double scale_;
    std::vector<double> ce_;
};

/// Throws CapExceeded if the tree below stage t has more than caps.max_leaves leaves.
void check_leaf_cap(const FiniteModel& m, Stage t, const EnumerationCaps& caps);

TrajectoryDistribution trajectory_distribution(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0,
                                               const EnumerationCaps& caps = {});

/// Law of Z = trajectory_cost under the policy from x0. Atoms closer than 1e-12
/// are merged; atoms are sorted by value.
CostDistribution cost_law(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0,
                          const EnumerationCaps& caps = {});

/// Law of the cost-to-go Z_t given X_t = x, by enumerating the sub-tree rooted at (t, x).
CostDistribution cost_to_go_law(const FiniteModel& m, const MarkovPolicy& pi, Stage t, StateIndex x,
                                const EnumerationCaps& caps = {});

/// reachable[t][x] is true iff X_t = x has positive probability from x0.
std::vector<std::vector<bool>> reachable_states(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0);

/**
 * Backward recursion for a fixed policy:
 *   W_N(x) = exp(k c_N(x)),
 *   W_t(x) = exp(k c_t(x, π_t(x))) Σ_w p_t(w|x,π_t(x)) W_{t+1}(f_t(x,π_t(x),w)),   k = -θ/2.
 * Entries are computed for every state, reachable or not.
 */
WTables w_tables(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp);

/// (-2/θ) log W_0(x0): the policy's exponential-utility cost from x0.
double evaluate_policy(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp, StateIndex x0);

/// Draws `trials` trajectories; disturbances are sampled by inverse CDF in
/// ascending disturbance order from one std::mt19937_64 stream seeded with `seed`.
std::vector<Trajectory> simulate(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0, std::uint64_t seed,
                                 std::size_t trials);

struct MonteCarloEstimate {
    double estimate;
    double std_error;
};

/// Sample certainty equivalent (-2/θ) log mean(exp((-θ/2) Z_i)) with a
/// delta-method standard error. Requires trials >= 2.
MonteCarloEstimate monte_carlo_risk(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp,
                                    StateIndex x0, std::uint64_t seed, std::size_t trials);

} // namespace riskdp
