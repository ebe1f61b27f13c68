#include "riskdp/solver.hpp"

#include <stdexcept>

namespace riskdp {

namespace {

// Shared backward pass; `continuation(t, x, u, next_values)` returns the cost-to-go term.
template <class Continuation>
SolveResult backward_induction(const FiniteModel& m, std::optional<RiskParam> theta, const SolveOptions& options,
                               Continuation continuation) {
    require_valid(m);
    const auto& d = m.dims();
    ValueTables values(d.horizon, d.states);
    MarkovPolicy policy = MarkovPolicy::constant(d.horizon, d.states);
    std::optional<StageQValues> qtab;
    if (options.keep_q_values) qtab.emplace(d.horizon, d.states, d.actions);

    for (StateIndex x = 0; x < d.states; ++x) values.at(d.horizon, x) = m.terminal_cost(x);

    std::vector<double> succ_values(static_cast<std::size_t>(d.disturbances));
    for (Stage t = d.horizon - 1; t >= 0; --t) {
        for (StateIndex x = 0; x < d.states; ++x) {
            double best = 0.0;
            ActionIndex best_u = 0;
            for (ActionIndex u = 0; u < d.actions; ++u) {
                const auto next = m.successors(t, x, u);
                for (std::size_t w = 0; w < next.size(); ++w) succ_values[w] = values(t + 1, next[w]);
                const double q = m.stage_cost(t, x, u) + continuation(m.kernel_row(t, x, u), succ_values);
                if (qtab) qtab->at(t, x, u) = q;
                if (u == 0 || q < best) {
                    best = q;
                    best_u = u;
                }
            }
            values.at(t, x) = best;
            policy.set(t, x, best_u);
        }
    }
    return SolveResult{std::move(values), std::move(policy), theta, std::move(qtab)};
}

} // namespace

SolveResult solve_exputil(const FiniteModel& m, const RiskParam& rp, const SolveOptions& options) {
    const double k = rp.exponent_scale();
    return backward_induction(m, rp, options, [k](std::span<const double> probs, const std::vector<double>& v) {
        return scaled_log_sum_exp(v, probs, k);
    });
}

SolveResult solve_risk_neutral(const FiniteModel& m, const SolveOptions& options) {
    return backward_induction(m, std::nullopt, options, [](std::span<const double> probs, const std::vector<double>& v) {
        double sum = 0.0;
        for (std::size_t w = 0; w < probs.size(); ++w) sum += probs[w] * v[w];
        return sum;
    });
}

std::vector<SweepRow> theta_sweep(const FiniteModel& m, const std::vector<RiskParam>& thetas, StateIndex x0) {
    if (thetas.empty()) throw std::invalid_argument("theta sweep needs at least one theta");
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(thetas[i - 1].theta() < thetas[i].theta()))
            throw std::invalid_argument("theta sweep values must be strictly ascending");
    if (x0 < 0 || x0 >= m.num_states()) throw std::out_of_range("initial state out of range");

    std::vector<SweepRow> rows;
    rows.reserve(thetas.size());
    const SolveOptions opts{.keep_q_values = false};
    for (const auto& rp : thetas) {
        auto result = solve_exputil(m, rp, opts);
        const bool changed = !rows.empty() && !(rows.back().policy == result.policy);
        rows.push_back(SweepRow{rp, result.values(0, x0), std::move(result.policy), changed});
    }
    return rows;
}

} // namespace riskdp
