#include "riskdp/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace riskdp {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> default_labels(std::vector<std::string> labels, std::int32_t count, char prefix) {
    if (labels.empty()) {
        labels.reserve(static_cast<std::size_t>(count));
        for (std::int32_t i = 0; i < count; ++i) labels.push_back(prefix + std::to_string(i));
    }
    if (labels.size() != static_cast<std::size_t>(count))
        throw std::invalid_argument("label count does not match dimension");
    return labels;
}

void check_dims(const Dimensions& d) {
    if (d.horizon < 1 || d.states < 1 || d.actions < 1 || d.disturbances < 1)
        throw std::invalid_argument("model dimensions must be positive (N, |S|, |A|, |D| >= 1)");
}

} // namespace

InvalidModel::InvalidModel(std::vector<std::string> violations)
    : std::invalid_argument("invalid model: " + join(violations, "; ")), violations_(std::move(violations)) {}

FiniteModel::FiniteModel(Dimensions dims, std::vector<StateIndex> dynamics, std::vector<double> kernel,
                         std::vector<double> stage_cost, std::vector<double> terminal_cost,
                         std::vector<std::string> state_labels, std::vector<std::string> action_labels,
                         std::vector<std::string> disturbance_labels)
    : dims_(dims), dynamics_(std::move(dynamics)), kernel_(std::move(kernel)), stage_cost_(std::move(stage_cost)),
      terminal_cost_(std::move(terminal_cost)) {
    check_dims(dims_);
    const std::size_t n4 = static_cast<std::size_t>(dims_.horizon) * dims_.states * dims_.actions * dims_.disturbances;
    const std::size_t n3 = static_cast<std::size_t>(dims_.horizon) * dims_.states * dims_.actions;
    if (dynamics_.size() != n4) throw std::invalid_argument("dynamics table has wrong size");
    if (kernel_.size() != n4) throw std::invalid_argument("kernel table has wrong size");
    if (stage_cost_.size() != n3) throw std::invalid_argument("stage cost table has wrong size");
    if (terminal_cost_.size() != static_cast<std::size_t>(dims_.states))
        throw std::invalid_argument("terminal cost table has wrong size");
    state_labels_ = default_labels(std::move(state_labels), dims_.states, 's');
    action_labels_ = default_labels(std::move(action_labels), dims_.actions, 'a');
    disturbance_labels_ = default_labels(std::move(disturbance_labels), dims_.disturbances, 'w');
}

ModelBuilder::ModelBuilder(Dimensions dims) : dims_(dims) {
    check_dims(dims_);
    const std::size_t n4 = static_cast<std::size_t>(dims_.horizon) * dims_.states * dims_.actions * dims_.disturbances;
    const std::size_t n3 = static_cast<std::size_t>(dims_.horizon) * dims_.states * dims_.actions;
    dynamics_.assign(n4, 0);
    kernel_.assign(n4, 0.0);
    stage_cost_.assign(n3, 0.0);
    terminal_cost_.assign(static_cast<std::size_t>(dims_.states), 0.0);
}

std::size_t ModelBuilder::index4(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w) const {
    if (t < 0 || t >= dims_.horizon || x < 0 || x >= dims_.states || u < 0 || u >= dims_.actions || w < 0 ||
        w >= dims_.disturbances)
        throw std::out_of_range("model builder index out of range");
    return ((static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u) * dims_.disturbances + w;
}

std::size_t ModelBuilder::index3(Stage t, StateIndex x, ActionIndex u) const {
    if (t < 0 || t >= dims_.horizon || x < 0 || x >= dims_.states || u < 0 || u >= dims_.actions)
        throw std::out_of_range("model builder index out of range");
    return (static_cast<std::size_t>(t) * dims_.states + x) * dims_.actions + u;
}

ModelBuilder& ModelBuilder::transition(Stage t, StateIndex x, ActionIndex u, DisturbanceIndex w, StateIndex next,
                                       double prob) {
    const auto i = index4(t, x, u, w);
    dynamics_[i] = next;
    kernel_[i] = prob;
    return *this;
}

ModelBuilder& ModelBuilder::stage_cost(Stage t, StateIndex x, ActionIndex u, double cost) {
    stage_cost_[index3(t, x, u)] = cost;
    return *this;
}

ModelBuilder& ModelBuilder::terminal_cost(StateIndex x, double cost) {
    if (x < 0 || x >= dims_.states) throw std::out_of_range("model builder index out of range");
    terminal_cost_[static_cast<std::size_t>(x)] = cost;
    return *this;
}

ModelBuilder& ModelBuilder::state_labels(std::vector<std::string> labels) {
    state_labels_ = std::move(labels);
    return *this;
}
ModelBuilder& ModelBuilder::action_labels(std::vector<std::string> labels) {
    action_labels_ = std::move(labels);
    return *this;
}
ModelBuilder& ModelBuilder::disturbance_labels(std::vector<std::string> labels) {
    disturbance_labels_ = std::move(labels);
    return *this;
}

FiniteModel ModelBuilder::build() const {
    return FiniteModel(dims_, dynamics_, kernel_, stage_cost_, terminal_cost_, state_labels_, action_labels_,
                       disturbance_labels_);
}

MarkovPolicy::MarkovPolicy(Stage horizon, std::int32_t states, std::vector<ActionIndex> actions)
    : horizon_(horizon), states_(states), actions_(std::move(actions)) {
    if (horizon_ < 1 || states_ < 1) throw std::invalid_argument("policy dimensions must be positive");
    if (actions_.size() != static_cast<std::size_t>(horizon_) * states_)
        throw std::invalid_argument("policy table must have N rows of |S| entries");
}

MarkovPolicy MarkovPolicy::constant(Stage horizon, std::int32_t states, ActionIndex action) {
    return MarkovPolicy(horizon, states,
                        std::vector<ActionIndex>(static_cast<std::size_t>(horizon) * states, action));
}

TransitionKernel::TransitionKernel(Dimensions dims, std::vector<double> q) : dims_(dims), q_(std::move(q)) {
    if (q_.size() != static_cast<std::size_t>(dims_.horizon) * dims_.states * dims_.actions * dims_.states)
        throw std::invalid_argument("transition kernel table has wrong size");
}

ValidationReport validate_model(const FiniteModel& m) {
    ValidationReport report;
    const auto& d = m.dims();
    auto where = [](auto... idx) {
        std::ostringstream os;
        os << '(';
        const char* sep = "";
        ((os << sep << idx, sep = ","), ...);
        os << ')';
        return os.str();
    };

    for (Stage t = 0; t < d.horizon; ++t) {
        for (StateIndex x = 0; x < d.states; ++x) {
            for (ActionIndex u = 0; u < d.actions; ++u) {
                double sum = 0.0;
                bool entries_ok = true;
                for (DisturbanceIndex w = 0; w < d.disturbances; ++w) {
                    const double p = m.prob(t, x, u, w);
                    const StateIndex next = m.next_state(t, x, u, w);
                    if (!std::isfinite(p) || p < 0.0) {
                        report.violations.push_back("negative or non-finite probability at (t,x,u,w)=" +
                                                    where(t, x, u, w));
                        entries_ok = false;
                    }
                    if (next < 0 || next >= d.states)
                        report.violations.push_back("state index out of range at (t,x,u,w)=" + where(t, x, u, w));
                    sum += p;
                }
                if (entries_ok && std::abs(sum - 1.0) > kKernelTolerance) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "kernel row does not sum to 1 at (t,x,u)=" << where(t, x, u) << " (sum " << sum << ')';
                    report.violations.push_back(os.str());
                }
                if (!std::isfinite(m.stage_cost(t, x, u)))
                    report.violations.push_back("non-finite stage cost at (t,x,u)=" + where(t, x, u));
            }
        }
    }
    for (StateIndex x = 0; x < d.states; ++x) {
        if (!std::isfinite(m.terminal_cost(x)))
            report.violations.push_back("non-finite terminal cost at (x)=" + where(x));
    }
    return report;
}

void require_valid(const FiniteModel& m) {
    auto report = validate_model(m);
    if (!report.ok()) throw InvalidModel(std::move(report.violations));
}

void require_policy_shape(const FiniteModel& m, const MarkovPolicy& pi) {
    if (pi.horizon() != m.horizon() || pi.num_states() != m.num_states())
        throw std::invalid_argument("policy shape does not match model (expected N rows of |S| entries)");
    for (ActionIndex u : pi.table()) {
        if (u < 0 || u >= m.num_actions()) throw std::invalid_argument("policy action index out of range");
    }
}

TransitionKernel pushforward(const FiniteModel& m) {
    require_valid(m);
    const auto& d = m.dims();
    std::vector<double> q(static_cast<std::size_t>(d.horizon) * d.states * d.actions * d.states, 0.0);
    for (Stage t = 0; t < d.horizon; ++t) {
        for (StateIndex x = 0; x < d.states; ++x) {
            for (ActionIndex u = 0; u < d.actions; ++u) {
                const std::size_t base = ((static_cast<std::size_t>(t) * d.states + x) * d.actions + u) * d.states;
                const auto next = m.successors(t, x, u);
                const auto probs = m.kernel_row(t, x, u);
                for (std::size_t w = 0; w < next.size(); ++w) q[base + next[w]] += probs[w];
            }
        }
    }
    return TransitionKernel(d, std::move(q));
}

namespace {

void check_trajectory(const FiniteModel& m, const Trajectory& traj) {
    if (traj.actions.size() != static_cast<std::size_t>(m.horizon()) ||
        traj.states.size() != traj.actions.size() + 1)
        throw std::out_of_range("trajectory length does not match model horizon");
    for (StateIndex x : traj.states)
        if (x < 0 || x >= m.num_states()) throw std::out_of_range("trajectory state index out of range");
    for (ActionIndex u : traj.actions)
        if (u < 0 || u >= m.num_actions()) throw std::out_of_range("trajectory action index out of range");
}

} // namespace

double cost_to_go(const FiniteModel& m, const Trajectory& traj, Stage t) {
    check_trajectory(m, traj);
    const Stage n = m.horizon();
    if (t < 0 || t > n) throw std::out_of_range("cost_to_go stage out of range");
    // Accumulated from the terminal stage backwards so that Z_t = c_t + Z_{t+1}
    // holds bit for bit.
    double z = m.terminal_cost(traj.states[static_cast<std::size_t>(n)]);
    for (Stage i = n - 1; i >= t; --i)
        z = m.stage_cost(i, traj.states[static_cast<std::size_t>(i)], traj.actions[static_cast<std::size_t>(i)]) + z;
    return z;
}

double trajectory_cost(const FiniteModel& m, const Trajectory& traj) { return cost_to_go(m, traj, 0); }

} // namespace riskdp
