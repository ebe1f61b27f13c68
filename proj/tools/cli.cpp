#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "riskdp/discretizer.hpp"
#include "riskdp/evaluator.hpp"
#include "riskdp/model_io.hpp"
#include "riskdp/oracle.hpp"
#include "riskdp/solver.hpp"

namespace riskdp::cli {

namespace fs = std::filesystem;

namespace {

/// Bad flag combination or malformed user input; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string model_path;
    std::string policy_path;
    std::string spec_path;
    std::vector<double> thetas;
    double theta = 0.0;
    bool theta_given = false;
    bool risk_neutral = false;
    bool renormalize = false;
    bool monte_carlo = false;
    std::string x0 = "0";
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::string out_path;
    std::uint64_t cap_policies = 0;
    std::uint64_t cap_leaves = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    out << content;
    if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

FiniteModel load_model(const RunConfig& cfg) {
    auto m = parse_model_json(read_file(cfg.model_path), LoadOptions{cfg.renormalize});
    require_valid(m);
    return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::int32_t resolve_index(const std::vector<std::string>& labels, const std::string& token, const char* what) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == token) return static_cast<std::int32_t>(i);
    std::size_t used = 0;
    long long idx = -1;
    try {
        idx = std::stoll(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size() || token.empty() || idx < 0 || idx >= static_cast<long long>(labels.size()))
        throw UsageError(std::string("unknown ") + what + " '" + token + "'");
    return static_cast<std::int32_t>(idx);
}

RiskParam make_theta(double theta) {
    try {
        return RiskParam(theta);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

OracleCaps oracle_caps(const RunConfig& cfg) {
    OracleCaps caps;
    if (cfg.cap_policies > 0) {
        caps.max_markov_policies = cfg.cap_policies;
        caps.max_history_policies = cfg.cap_policies;
    }
    if (cfg.cap_leaves > 0) caps.max_leaves = cfg.cap_leaves;
    return caps;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
    if (cfg.risk_neutral == cfg.theta_given) throw UsageError("solve needs exactly one of --theta or --risk-neutral");
    const auto m = load_model(cfg);
    const StateIndex x0 = resolve_state(m, cfg.x0);
    const auto result = cfg.risk_neutral ? solve_risk_neutral(m, SolveOptions{.keep_q_values = false})
                                         : solve_exputil(m, make_theta(cfg.theta), SolveOptions{.keep_q_values = false});

    std::ostringstream values;
    values << "t,state,value\n";
    for (Stage t = 0; t <= m.horizon(); ++t)
        for (StateIndex x = 0; x < m.num_states(); ++x)
            values << t << ',' << m.state_labels()[x] << ',' << format_real(result.values(t, x)) << '\n';

    const fs::path dir = cfg.out_path.empty() ? fs::path(".") : fs::path(cfg.out_path);
    fs::create_directories(dir);
    write_file(dir / "values.csv", values.str());
    write_file(dir / "policy.csv", policy_to_csv(m, result.policy));

    out << "V_0(" << m.state_labels()[x0] << ") = " << format_real(result.values(0, x0)) << '\n';
    out << "action at t=0: " << m.action_labels()[result.policy(0, x0)] << '\n';
    return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    const auto m = load_model(cfg);
    const StateIndex x0 = resolve_state(m, cfg.x0);
    const auto rp = make_theta(cfg.theta);
    const auto pi = parse_policy_csv(m, read_file(cfg.policy_path));
    out << "exact = " << format_real(evaluate_policy(m, pi, rp, x0)) << '\n';
    if (cfg.monte_carlo) {
        if (cfg.trials < 2) throw UsageError("--mc needs --trials >= 2");
        const auto mc = monte_carlo_risk(m, pi, rp, x0, cfg.seed, cfg.trials);
        out << "mc = " << format_real(mc.estimate) << " +/- " << format_real(mc.std_error) << " (seed " << cfg.seed
            << ", trials " << cfg.trials << ")\n";
    }
    return kOk;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
    const auto m = load_model(cfg);
    const StateIndex x0 = resolve_state(m, cfg.x0);
    const auto c = certify(m, make_theta(cfg.theta), x0, oracle_caps(cfg));
    out << "dp_value = " << format_real(c.dp_value) << '\n'
        << "markov_value = " << format_real(c.markov_value) << '\n'
        << "history_value = " << format_real(c.history_value) << '\n'
        << "max_gap = " << format_real(c.max_gap) << '\n'
        << "dp_policy_in_argmin = " << (c.dp_policy_optimal ? "yes" : "no") << '\n'
        << (c.pass ? "PASS" : "FAIL") << '\n';
    return c.pass ? kOk : kCertifyFail;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    std::vector<RiskParam> thetas;
    for (double th : cfg.thetas) thetas.push_back(make_theta(th));
    for (std::size_t i = 1; i < thetas.size(); ++i)
        if (!(thetas[i - 1].theta() < thetas[i].theta())) throw UsageError("--thetas must be strictly ascending");
    const auto m = load_model(cfg);
    const StateIndex x0 = resolve_state(m, cfg.x0);
    const auto rows = theta_sweep(m, thetas, x0);

    std::ostringstream csv;
    csv << "theta,value_at_x0,policy_changed_from_previous\n";
    for (const auto& row : rows)
        csv << format_real(row.theta.theta()) << ',' << format_real(row.value) << ',' << (row.policy_changed ? 1 : 0)
            << '\n';
    write_file(cfg.out_path.empty() ? fs::path("sweep.csv") : fs::path(cfg.out_path), csv.str());
    out << csv.str();
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.trials < 1) throw UsageError("simulate needs --trials >= 1");
    const auto m = load_model(cfg);
    const StateIndex x0 = resolve_state(m, cfg.x0);
    const auto pi = parse_policy_csv(m, read_file(cfg.policy_path));
    const auto paths = simulate(m, pi, x0, cfg.seed, cfg.trials);

    std::ostringstream csv;
    csv << "trial,t,state,action\n";
    double total = 0.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& p = paths[i];
        for (Stage t = 0; t <= m.horizon(); ++t) {
            csv << i << ',' << t << ',' << m.state_labels()[p.states[t]] << ',';
            if (t < m.horizon()) csv << m.action_labels()[p.actions[t]];
            csv << '\n';
        }
        total += trajectory_cost(m, p);
    }
    write_file(cfg.out_path.empty() ? fs::path("trajectories.csv") : fs::path(cfg.out_path), csv.str());
    out << "trials = " << paths.size() << '\n'
        << "mean_cost = " << format_real(total / static_cast<double>(paths.size())) << '\n';
    if (cfg.theta_given && paths.size() >= 2) {
        const auto mc = monte_carlo_risk(m, pi, make_theta(cfg.theta), x0, cfg.seed, cfg.trials);
        out << "mc = " << format_real(mc.estimate) << " +/- " << format_real(mc.std_error) << '\n';
    }
    return kOk;
}

int cmd_discretize(const RunConfig& cfg, std::ostream& out) {
    if (cfg.out_path.empty()) throw UsageError("discretize needs --out");
    ContinuousSpecFile file;
    try {
        file = parse_affine1d_json(read_file(cfg.spec_path));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto m = discretize(file.spec, file.grid);
    save_model_json(m, cfg.out_path);
    out << "wrote " << cfg.out_path << ": N=" << m.horizon() << " states=" << m.num_states()
        << " actions=" << m.num_actions() << " disturbances=" << m.num_disturbances() << '\n';
    return kOk;
}

} // namespace

std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

StateIndex resolve_state(const FiniteModel& m, const std::string& token) {
    return resolve_index(m.state_labels(), token, "state");
}

MarkovPolicy parse_policy_csv(const FiniteModel& m, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw UsageError("policy file is empty");
    const auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "t" || header[1] != "state" || header[2] != "action")
        throw UsageError("policy file header must be 't,state,action'");

    const auto cells = static_cast<std::size_t>(m.horizon()) * m.num_states();
    std::vector<ActionIndex> actions(cells, -1);
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto row = split_csv_line(line);
        if (row.size() != 3) throw UsageError("policy row must have 3 columns: " + line);
        std::size_t used = 0;
        long long t = -1;
        try {
            t = std::stoll(row[0], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != row[0].size() || t < 0 || t >= m.horizon()) throw UsageError("policy row has invalid stage: " + line);
        const StateIndex x = resolve_index(m.state_labels(), row[1], "state");
        const ActionIndex u = resolve_index(m.action_labels(), row[2], "action");
        auto& slot = actions[static_cast<std::size_t>(t) * m.num_states() + x];
        if (slot != -1) throw UsageError("policy has duplicate entry: " + line);
        slot = u;
    }
    for (ActionIndex u : actions)
        if (u == -1) throw UsageError("policy must list an action for every (t, state)");
    return MarkovPolicy(m.horizon(), m.num_states(), std::move(actions));
}

std::string policy_to_csv(const FiniteModel& m, const MarkovPolicy& pi) {
    std::ostringstream os;
    os << "t,state,action\n";
    for (Stage t = 0; t < m.horizon(); ++t)
        for (StateIndex x = 0; x < m.num_states(); ++x)
            os << t << ',' << m.state_labels()[x] << ',' << m.action_labels()[pi(t, x)] << '\n';
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-horizon exponential-utility MDP solver", "riskdp"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_model = [&](CLI::App* sub) { sub->add_option("--model", cfg.model_path, "Model file (JSON)")->required(); };
    auto add_x0 = [&](CLI::App* sub) { sub->add_option("--x0", cfg.x0, "Initial state label or index")->capture_default_str(); };
    auto add_renorm = [&](CLI::App* sub) {
        sub->add_flag("--renormalize", cfg.renormalize, "Rescale kernel rows within 1e-9 of summing to 1");
    };

    auto* solve = app.add_subcommand("solve", "Backward induction; writes values.csv and policy.csv");
    add_model(solve);
    auto* solve_theta = solve->add_option("--theta", cfg.theta, "Risk-aversion parameter (< 0)");
    solve->add_flag("--risk-neutral", cfg.risk_neutral, "Minimize expected cost instead")->excludes(solve_theta);
    add_x0(solve);
    solve->add_option("--out", cfg.out_path, "Output directory (default: current directory)");
    add_renorm(solve);

    auto* evaluate = app.add_subcommand("evaluate", "Exact (and optionally Monte Carlo) value of a fixed policy");
    add_model(evaluate);
    evaluate->add_option("--policy", cfg.policy_path, "Policy CSV (t,state,action)")->required();
    evaluate->add_option("--theta", cfg.theta, "Risk-aversion parameter (< 0)")->required();
    add_x0(evaluate);
    auto* mc = evaluate->add_flag("--mc", cfg.monte_carlo, "Add a Monte Carlo estimate");
    evaluate->add_option("--seed", cfg.seed, "RNG seed")->needs(mc);
    evaluate->add_option("--trials", cfg.trials, "Monte Carlo trials")->needs(mc);
    add_renorm(evaluate);

    auto* cert = app.add_subcommand("certify", "Compare backward induction with brute-force policy enumeration");
    add_model(cert);
    cert->add_option("--theta", cfg.theta, "Risk-aversion parameter (< 0)")->required();
    add_x0(cert);
    cert->add_option("--cap-policies", cfg.cap_policies, "Maximum number of enumerated policies");
    cert->add_option("--cap-leaves", cfg.cap_leaves, "Maximum number of trajectory-tree leaves");
    add_renorm(cert);

    auto* sweep = app.add_subcommand("sweep", "Solve for an ascending list of thetas; writes sweep.csv");
    add_model(sweep);
    sweep->add_option("--thetas", cfg.thetas, "Comma-separated ascending thetas")->required()->delimiter(',');
    add_x0(sweep);
    sweep->add_option("--out", cfg.out_path, "Output CSV (default: sweep.csv)");
    add_renorm(sweep);

    auto* sim = app.add_subcommand("simulate", "Sample trajectories under a policy; writes trajectories.csv");
    add_model(sim);
    sim->add_option("--policy", cfg.policy_path, "Policy CSV (t,state,action)")->required();
    add_x0(sim);
    sim->add_option("--seed", cfg.seed, "RNG seed")->required();
    sim->add_option("--trials", cfg.trials, "Number of trajectories")->required();
    auto* sim_theta = sim->add_option("--theta", cfg.theta, "Also report the Monte Carlo exponential-utility estimate");
    sim->add_option("--out", cfg.out_path, "Output CSV (default: trajectories.csv)");
    add_renorm(sim);

    auto* disc = app.add_subcommand("discretize", "Convert an affine1d continuous spec into a model file");
    disc->add_option("--spec", cfg.spec_path, "Continuous spec file (JSON)")->required();
    disc->add_option("--out", cfg.out_path, "Output model file")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }

    cfg.theta_given = solve_theta->count() > 0 || sim_theta->count() > 0;
    try {
        if (*solve) return cmd_solve(cfg, out);
        if (*evaluate) return cmd_evaluate(cfg, out);
        if (*cert) return cmd_certify(cfg, out);
        if (*sweep) return cmd_sweep(cfg, out);
        if (*sim) return cmd_simulate(cfg, out);
        if (*disc) return cmd_discretize(cfg, out);
    } catch (const InvalidModel& e) {
        err << "model validation failed:\n";
        for (const auto& v : e.violations()) err << "  " << v << '\n';
        return kValidationError;
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << '\n';
        return kCapExceeded;
    } catch (const std::ios_base::failure& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const FormatError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kValidationError;
    }
    return kValidationError;
}

} // namespace riskdp::cli
