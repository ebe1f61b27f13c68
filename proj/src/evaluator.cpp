#include "riskdp/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "riskdp/rng.hpp"

namespace riskdp {

namespace {

// Probability-sum tolerance for laws assembled from many kernel products.
constexpr double kEnumeratedLawTolerance = 1e-10;
constexpr double kAtomMergeTolerance = 1e-12;

void check_state(const FiniteModel& m, StateIndex x) {
    if (x < 0 || x >= m.num_states()) throw std::out_of_range("state index out of range");
}

void check_inputs(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x) {
    require_valid(m);
    require_policy_shape(m, pi);
    check_state(m, x);
}

// Depth-first expansion of the tree rooted at (t0, x). Keys are the state and
// action sequences from stage t0 onward; duplicates are merged by summing.
std::map<Trajectory, double> enumerate_subtree(const FiniteModel& m, const MarkovPolicy& pi, Stage t0,
                                               StateIndex x) {
    std::map<Trajectory, double> leaves;
    Trajectory path;
    path.states.push_back(x);

    auto expand = [&](auto&& self, Stage t, double prob) -> void {
        if (t == m.horizon()) {
            leaves[path] += prob;
            return;
        }
        const StateIndex xt = path.states.back();
        const ActionIndex u = pi(t, xt);
        const auto next = m.successors(t, xt, u);
        const auto probs = m.kernel_row(t, xt, u);
        path.actions.push_back(u);
        for (std::size_t w = 0; w < next.size(); ++w) {
            if (probs[w] <= 0.0) continue;
            path.states.push_back(next[w]);
            self(self, t + 1, prob * probs[w]);
            path.states.pop_back();
        }
        path.actions.pop_back();
    };
    expand(expand, t0, 1.0);
    return leaves;
}

// Cost of a path that starts at stage t0, summed from the terminal stage backwards.
double path_cost(const FiniteModel& m, const Trajectory& path, Stage t0) {
    const std::size_t len = path.actions.size();
    double z = m.terminal_cost(path.states[len]);
    for (std::size_t i = len; i-- > 0;)
        z = m.stage_cost(t0 + static_cast<Stage>(i), path.states[i], path.actions[i]) + z;
    return z;
}

CostDistribution merge_atoms(std::vector<CostAtom> atoms) {
    std::stable_sort(atoms.begin(), atoms.end(), [](const CostAtom& a, const CostAtom& b) { return a.value < b.value; });
    std::vector<CostAtom> merged;
    for (const auto& a : atoms) {
        if (!merged.empty() && a.value - merged.back().value <= kAtomMergeTolerance)
            merged.back().prob += a.prob;
        else
            merged.push_back(a);
    }
    return CostDistribution(std::move(merged), kEnumeratedLawTolerance);
}

} // namespace

double WTables::w(Stage t, StateIndex x) const { return std::exp(log_w(t, x)); }

void check_leaf_cap(const FiniteModel& m, Stage t, const EnumerationCaps& caps) {
    std::uint64_t leaves = 1;
    for (Stage i = t; i < m.horizon(); ++i) {
        leaves *= static_cast<std::uint64_t>(m.num_disturbances());
        if (leaves > caps.max_leaves)
            throw CapExceeded("instance too large for exact enumeration (|D|^N exceeds leaf cap " +
                              std::to_string(caps.max_leaves) + ")");
    }
}

TrajectoryDistribution trajectory_distribution(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0,
                                               const EnumerationCaps& caps) {
    check_inputs(m, pi, x0);
    check_leaf_cap(m, 0, caps);
    auto leaves = enumerate_subtree(m, pi, 0, x0);
    TrajectoryDistribution out;
    out.entries.reserve(leaves.size());
    for (auto& [traj, prob] : leaves) out.entries.emplace_back(traj, prob);
    return out;
}

CostDistribution cost_law(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0, const EnumerationCaps& caps) {
    const auto dist = trajectory_distribution(m, pi, x0, caps);
    std::vector<CostAtom> atoms;
    atoms.reserve(dist.entries.size());
    for (const auto& [traj, prob] : dist.entries) atoms.push_back({trajectory_cost(m, traj), prob});
    return merge_atoms(std::move(atoms));
}

CostDistribution cost_to_go_law(const FiniteModel& m, const MarkovPolicy& pi, Stage t, StateIndex x,
                                const EnumerationCaps& caps) {
    check_inputs(m, pi, x);
    if (t < 0 || t > m.horizon()) throw std::out_of_range("stage out of range");
    check_leaf_cap(m, t, caps);
    const auto leaves = enumerate_subtree(m, pi, t, x);
    std::vector<CostAtom> atoms;
    atoms.reserve(leaves.size());
    for (const auto& [path, prob] : leaves) atoms.push_back({path_cost(m, path, t), prob});
    return merge_atoms(std::move(atoms));
}

std::vector<std::vector<bool>> reachable_states(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0) {
    check_inputs(m, pi, x0);
    const auto n = static_cast<std::size_t>(m.horizon());
    std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>(static_cast<std::size_t>(m.num_states()), false));
    reach[0][static_cast<std::size_t>(x0)] = true;
    for (Stage t = 0; t < m.horizon(); ++t) {
        for (StateIndex x = 0; x < m.num_states(); ++x) {
            if (!reach[t][x]) continue;
            const ActionIndex u = pi(t, x);
            const auto next = m.successors(t, x, u);
            const auto probs = m.kernel_row(t, x, u);
            for (std::size_t w = 0; w < next.size(); ++w)
                if (probs[w] > 0.0) reach[t + 1][next[w]] = true;
        }
    }
    return reach;
}

WTables w_tables(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp) {
    require_valid(m);
    require_policy_shape(m, pi);
    const double k = rp.exponent_scale();
    WTables tables(m.horizon(), m.num_states(), k);
    for (StateIndex x = 0; x < m.num_states(); ++x) tables.certainty_equivalent_at(m.horizon(), x) = m.terminal_cost(x);

    std::vector<double> succ(static_cast<std::size_t>(m.num_disturbances()));
    for (Stage t = m.horizon() - 1; t >= 0; --t) {
        for (StateIndex x = 0; x < m.num_states(); ++x) {
            const ActionIndex u = pi(t, x);
            const auto next = m.successors(t, x, u);
            for (std::size_t w = 0; w < next.size(); ++w) succ[w] = tables.certainty_equivalent(t + 1, next[w]);
            // log W_t = k c + log Σ p W_{t+1}, divided through by k.
            tables.certainty_equivalent_at(t, x) = m.stage_cost(t, x, u) + scaled_log_sum_exp(succ, m.kernel_row(t, x, u), k);
        }
    }
    return tables;
}

double evaluate_policy(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp, StateIndex x0) {
    check_state(m, x0);
    return w_tables(m, pi, rp).certainty_equivalent(0, x0);
}

std::vector<Trajectory> simulate(const FiniteModel& m, const MarkovPolicy& pi, StateIndex x0, std::uint64_t seed,
                                 std::size_t trials) {
    check_inputs(m, pi, x0);
    if (trials < 1) throw std::invalid_argument("simulate needs at least one trial");
    Rng rng(seed);
    std::vector<Trajectory> out;
    out.reserve(trials);
    const auto n = static_cast<std::size_t>(m.horizon());
    for (std::size_t i = 0; i < trials; ++i) {
        Trajectory traj;
        traj.states.reserve(n + 1);
        traj.actions.reserve(n);
        StateIndex x = x0;
        traj.states.push_back(x);
        for (Stage t = 0; t < m.horizon(); ++t) {
            const ActionIndex u = pi(t, x);
            const auto probs = m.kernel_row(t, x, u);
            const auto next = m.successors(t, x, u);
            const double draw = uniform01(rng);
            double cumulative = 0.0;
            std::size_t chosen = probs.size();
            std::size_t last_positive = 0;
            for (std::size_t w = 0; w < probs.size(); ++w) {
                if (probs[w] <= 0.0) continue;
                last_positive = w;
                cumulative += probs[w];
                if (draw < cumulative) {
                    chosen = w;
                    break;
                }
            }
            // Rounding can leave the cumulative sum just below 1.
            if (chosen == probs.size()) chosen = last_positive;
            x = next[chosen];
            traj.actions.push_back(u);
            traj.states.push_back(x);
        }
        out.push_back(std::move(traj));
    }
    return out;
}

MonteCarloEstimate monte_carlo_risk(const FiniteModel& m, const MarkovPolicy& pi, const RiskParam& rp,
                                    StateIndex x0, std::uint64_t seed, std::size_t trials) {
    if (trials < 2) throw std::invalid_argument("Monte Carlo estimate needs at least two trials");
    const auto paths = simulate(m, pi, x0, seed, trials);
    std::vector<double> costs;
    costs.reserve(paths.size());
    for (const auto& p : paths) costs.push_back(trajectory_cost(m, p));

    const double k = rp.exponent_scale();
    const double shift = *std::max_element(costs.begin(), costs.end());
    std::vector<double> y;
    y.reserve(costs.size());
    for (double z : costs) y.push_back(std::exp(k * (z - shift)));

    const auto n = static_cast<double>(trials);
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    return {shift + std::log(mean) / k, sd / (mean * std::sqrt(n)) / k};
}

} // namespace riskdp
