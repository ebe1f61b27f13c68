// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "riskdp/discretizer.hpp"
#include "riskdp/evaluator.hpp"
#include "riskdp/model_io.hpp"
#include "riskdp/oracle.hpp"
#include "riskdp/solver.hpp"
#include "support/instances.hpp"

using namespace riskdp;
using namespace riskdp::testing;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kOracleTol = 1e-9;
constexpr double kRecursionTol = 1e-9;
constexpr double kAxiomTol = 1e-9;
constexpr double kMeanVarianceRatio = 0.3;
constexpr double kNeutralLimitTol = 1e-3;
constexpr double kRoundingFloor = 1e-12;
constexpr double kMcSigmas = 3.0;
constexpr double kMcCoverage = 0.95;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// 1. Backward induction equals the brute-force Markov optimum.
Outcome oracle_optimality() {
    Outcome o;
    double worst = 0.0;
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        const auto m = random_instance(seed, {.max_states = 3, .max_actions = 2, .max_disturbances = 3, .max_horizon = 3});
        for (double th : {-0.1, -1.0, -5.0}) {
            const RiskParam rp(th);
            const auto dp = solve_exputil(m, rp, {.keep_q_values = false});
            for (StateIndex x0 = 0; x0 < m.num_states(); ++x0) {
                const auto bf = brute_force_markov(m, rp, x0);
                const double gap = std::abs(dp.values(0, x0) - bf.best_value);
                worst = std::max(worst, gap);
                ++checked;
                if (gap > kOracleTol) o.fail("value gap " + fmt(gap) + " at seed " + std::to_string(seed));
                if (std::find(bf.optimal_policies.begin(), bf.optimal_policies.end(), dp.policy) ==
                    bf.optimal_policies.end())
                    o.fail("DP policy outside argmin at seed " + std::to_string(seed));
            }
        }
    }
    if (o.pass) o.detail = std::to_string(checked) + " cases, max gap " + fmt(worst);
    return o;
}

// 2. History-dependent policies do no better than Markov policies.
Outcome markov_sufficiency() {
    Outcome o;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto m = random_instance(seed, {.max_states = 2, .max_actions = 2, .max_disturbances = 2, .max_horizon = 2,
                                              .exact = true});
        for (double th : {-0.5, -2.0}) {
            const RiskParam rp(th);
            for (StateIndex x0 = 0; x0 < 2; ++x0) {
                const double gap = std::abs(brute_force_history(m, rp, x0) - brute_force_markov(m, rp, x0).best_value);
                worst = std::max(worst, gap);
                if (gap > kOracleTol) o.fail("gap " + fmt(gap) + " at seed " + std::to_string(seed));
            }
        }
    }
    if (o.pass) o.detail = "200 instances, max gap " + fmt(worst);
    return o;
}

// 3. The W recursion equals the entropic risk of the enumerated cost-to-go law.
Outcome recursion_equivalence() {
    Outcome o;
    double worst = 0.0;
    int points = 0;
    const double thetas[] = {-0.1, -0.7, -2.0, -5.0};
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto m = random_instance(seed, {.max_states = 4, .max_actions = 3, .max_disturbances = 3, .max_horizon = 4});
        const auto pi = random_policy(m, seed + 10'000);
        const RiskParam rp(thetas[seed % 4]);
        const StateIndex x0 = static_cast<StateIndex>(seed % static_cast<std::uint64_t>(m.num_states()));
        const auto w = w_tables(m, pi, rp);
        const auto reach = reachable_states(m, pi, x0);
        for (Stage t = 0; t <= m.horizon(); ++t)
            for (StateIndex x = 0; x < m.num_states(); ++x) {
                if (!reach[t][x]) continue;
                const double gap = std::abs(w.certainty_equivalent(t, x) - entropic_risk(cost_to_go_law(m, pi, t, x), rp));
                worst = std::max(worst, gap);
                ++points;
                if (gap > kRecursionTol) o.fail("gap " + fmt(gap) + " at seed " + std::to_string(seed));
            }
    }
    if (o.pass) o.detail = std::to_string(points) + " reachable (t,x), max gap " + fmt(worst);
    return o;
}

CostDistribution random_distribution(Rng& rng, double scale) {
    const int n = uniform_int(rng, 1, 8);
    std::vector<CostAtom> atoms(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& a : atoms) {
        a.value = scale * (2.0 * uniform01(rng) - 1.0);
        a.prob = 0.01 + uniform01(rng);
        total += a.prob;
    }
    for (auto& a : atoms) a.prob /= total;
    return CostDistribution(std::move(atoms), 1e-12);
}

// 4. Jensen, θ-monotonicity, translation invariance, cost monotonicity, stability.
Outcome risk_axioms() {
    Outcome o;
    Rng rng(20240501);
    const double grid[] = {-10.0, -5.0, -2.0, -1.0, -0.5, -0.1, -0.01, -0.001};
    for (int i = 0; i < 500; ++i) {
        const auto z = random_distribution(rng, 10.0);
        const double mean = expectation(z);
        const double c = 20.0 * uniform01(rng) - 10.0;
        std::vector<CostAtom> bumped = z.atoms();
        for (auto& a : bumped) a.value += 3.0 * uniform01(rng);
        const CostDistribution larger(bumped);
        double previous = std::numeric_limits<double>::infinity();
        for (double th : grid) {
            const RiskParam rp(th);
            const double r = entropic_risk(z, rp);
            if (r < mean - kAxiomTol) o.fail("Jensen bound violated");
            if (r > previous + kAxiomTol) o.fail("not monotone in theta");
            if (std::abs(entropic_risk(z.shifted(c), rp) - (r + c)) > kAxiomTol) o.fail("translation invariance violated");
            if (entropic_risk(larger, rp) < r - kAxiomTol) o.fail("cost monotonicity violated");
            previous = r;
        }
    }
    const RiskParam steep(-10.0);
    for (int i = 0; i < 100; ++i) {
        const auto z = random_distribution(rng, 1e4);
        const double r = entropic_risk(z, steep);
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& a : z.atoms()) hi = std::max(hi, a.value);
        if (!std::isfinite(r) || r > hi + kAxiomTol || r < expectation(z) - kAxiomTol * 1e4)
            o.fail("unstable at costs of order 1e4, theta = -10");
    }
    if (o.pass) o.detail = "500 distributions x 8 thetas, 100 large-cost distributions";
    return o;
}

// 5. The mean-variance approximation error shrinks quadratically in θ.
Outcome mean_variance_approximation() {
    Outcome o;
    const std::vector<CostDistribution> fixtures = {
        CostDistribution({{0.0, 0.9}, {3.0, 0.1}}),
        CostDistribution({{0.0, 0.25}, {1.0, 0.5}, {2.0, 0.25}}),
        CostDistribution({{-1.0, 0.2}, {0.5, 0.5}, {4.0, 0.3}}),
        CostDistribution({{1.0, 0.6}, {2.0, 0.3}, {6.0, 0.1}}),
    };
    double worst = 0.0;
    for (const auto& z : fixtures)
        for (double th : {-0.1, -0.05, -0.025}) {
            const RiskParam full(th), half(th / 2);
            const double e_full = std::abs(entropic_risk(z, full) - mean_variance_approx(z, full));
            const double e_half = std::abs(entropic_risk(z, half) - mean_variance_approx(z, half));
            const double ratio = e_half / e_full;
            worst = std::max(worst, ratio);
            if (!(ratio <= kMeanVarianceRatio)) o.fail("ratio " + fmt(ratio) + " at theta " + fmt(th));
        }
    if (o.pass) o.detail = "worst ratio " + fmt(worst);
    return o;
}

// Unique risk-neutral optimum at every (t, x) reachable from x0 under some policy.
bool unique_neutral_policy(const FiniteModel& m, StateIndex x0) {
    const auto r = solve_risk_neutral(m);
    const auto& q = *r.stage_q_values;
    std::vector<bool> live(static_cast<std::size_t>(m.num_states()), false);
    live[static_cast<std::size_t>(x0)] = true;
    for (Stage t = 0; t < m.horizon(); ++t) {
        std::vector<bool> next(live.size(), false);
        for (StateIndex x = 0; x < m.num_states(); ++x) {
            if (!live[static_cast<std::size_t>(x)]) continue;
            for (ActionIndex u = 0; u < m.num_actions(); ++u) {
                if (u != r.policy(t, x) && q(t, x, u) - r.values(t, x) <= 1e-6) return false;
                for (DisturbanceIndex w = 0; w < m.num_disturbances(); ++w)
                    if (m.prob(t, x, u, w) > 0.0) next[static_cast<std::size_t>(m.next_state(t, x, u, w))] = true;
            }
        }
        live = std::move(next);
    }
    return true;
}

// 6. V_0^θ tends to the risk-neutral value as θ → 0⁻.
Outcome risk_neutral_limit() {
    Outcome o;
    std::vector<FiniteModel> models{flip_instance()};
    for (std::uint64_t seed = 1; models.size() < 21 && seed < 10'000; ++seed) {
        auto m = random_instance(seed, {.max_states = 3, .max_actions = 2, .max_disturbances = 3, .max_horizon = 3, .exact = true});
        if (unique_neutral_policy(m, 0)) models.push_back(std::move(m));
    }
    if (models.size() != 21) {
        o.fail("could not find 20 instances with a unique risk-neutral policy");
        return o;
    }
    if (!unique_neutral_policy(models[0], 0)) o.fail("flip instance has a tied risk-neutral policy");
    double worst_final = 0.0;
    int degenerate = 0;
    for (const auto& m : models) {
        const double neutral = solve_risk_neutral(m, {.keep_q_values = false}).values(0, 0);
        double previous = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= 5; ++k) {
            const double gap =
                std::abs(solve_exputil(m, RiskParam(-std::pow(10.0, -k)), {.keep_q_values = false}).values(0, 0) - neutral);
            // Strict decrease unless the cost from x0 is deterministic and the gap is rounding noise.
            if (!(gap < previous || gap <= kRoundingFloor)) o.fail("gap not decreasing at k = " + std::to_string(k) + ": " + fmt(previous) + " -> " + fmt(gap));
            previous = gap;
        }
        worst_final = std::max(worst_final, previous);
        degenerate += previous <= kRoundingFloor ? 1 : 0;
        if (!(previous < kNeutralLimitTol)) o.fail("gap " + fmt(previous) + " at theta = -1e-5");
    }
    if (o.pass) o.detail = "21 instances (" + std::to_string(degenerate) + " with deterministic optimal cost), worst gap at -1e-5: " +
                   fmt(worst_final);
    return o;
}

// 7. Monte Carlo estimates are consistent with the exact value.
Outcome monte_carlo_consistency() {
    Outcome o;
    const auto m = flip_instance();
    const auto pi = flip_policy(0);
    const RiskParam rp(-1.0);
    const double exact = evaluate_policy(m, pi, rp, 0);
    if (std::abs(exact - kFlipRiskyValue) > 1e-12) o.fail("exact value " + fmt(exact) + " off the reference");
    const auto single = monte_carlo_risk(m, pi, rp, 0, 12345, 100'000);
    if (std::abs(single.estimate - exact) > kMcSigmas * single.std_error) o.fail("seed 12345 outside 3 standard errors");
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        const auto est = monte_carlo_risk(m, pi, rp, 0, seed, 100'000);
        covered += std::abs(est.estimate - exact) <= kMcSigmas * est.std_error ? 1 : 0;
    }
    if (covered < kMcCoverage * 40) o.fail("coverage " + std::to_string(covered) + "/40");
    if (o.pass)
        o.detail = "estimate " + fmt(single.estimate) + " +/- " + fmt(single.std_error) + ", coverage " +
                   std::to_string(covered) + "/40";
    return o;
}

// 8. Values on successively refined grids form a contracting sequence.
Outcome discretization_convergence() {
    Outcome o;
    Affine1DSpec s;
    s.horizon = 5;
    s.a = 0.9;
    s.b = 1.0;
    s.sigma = 0.5;
    s.x_lo = -4.0;
    s.x_hi = 4.0;
    s.controls = {-1.0, -0.5, 0.0, 0.5, 1.0};
    s.q = {1.0};
    s.r = {1.0};
    s.q_terminal = 1.0;
    const RiskParam rp(-0.5);
    double v[3];
    const std::int32_t points[3] = {65, 129, 257};
    for (int i = 0; i < 3; ++i) {
        const auto m = discretize(s, {points[i], 16});
        v[i] = solve_exputil(m, rp, {.keep_q_values = false}).values(0, (points[i] - 1) / 2);
    }
    const double coarse = std::abs(v[1] - v[0]), fine = std::abs(v[2] - v[1]);
    if (!(fine < coarse)) o.fail("|V257 - V129| = " + fmt(fine) + " not below |V129 - V65| = " + fmt(coarse));
    if (o.pass) o.detail = "|V129-V65| = " + fmt(coarse) + ", |V257-V129| = " + fmt(fine);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 9. Every CLI command is byte-for-byte reproducible.
Outcome cli_determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "riskdp_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string model = (root / "flip.json").string();
    save_model_json(flip_instance(), model);
    std::ofstream(root / "policy.csv") << "t,state,action\n0,s0,a\n0,s1,a\n0,s2,a\n0,s3,a\n";
    std::ofstream(root / "spec.json")
        << R"({"family":"affine1d","horizon":5,"a":0.9,"b":1,"sigma":0.5,"x_bounds":[-4,4],)"
        << R"("controls":[-1,-0.5,0,0.5,1],"q":1,"r":1,"qN":1,"grid":{"state_points":65,"noise_atoms":8}})";
    const std::string policy = (root / "policy.csv").string(), spec = (root / "spec.json").string();

    // Each command writes into its own directory; `@` is replaced by that directory.
    const std::vector<std::vector<std::string>> commands = {
        {"solve", "--model", model, "--theta", "-1", "--out", "@"},
        {"solve", "--model", model, "--risk-neutral", "--out", "@"},
        {"evaluate", "--model", model, "--policy", policy, "--theta", "-1", "--mc", "--seed", "7", "--trials", "20000"},
        {"certify", "--model", model, "--theta", "-1"},
        {"sweep", "--model", model, "--thetas", "-2,-1,-0.5,-0.1,-0.01", "--out", "@/sweep.csv"},
        {"simulate", "--model", model, "--policy", policy, "--seed", "3", "--trials", "500", "--theta", "-1", "--out",
         "@/traj.csv"},
        {"discretize", "--spec", spec, "--out", "@/model.json"},
    };
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string captured[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / ("cmd" + std::to_string(c) + "_" + std::to_string(rep));
            fs::create_directories(dir);
            std::vector<std::string> args{"riskdp"};
            for (auto a : commands[c]) {
                if (const auto at = a.find('@'); at != std::string::npos) a.replace(at, 1, dir.string());
                args.push_back(a);
            }
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            if (code != 0) o.fail(commands[c][0] + " exited with " + std::to_string(code) + ": " + err.str());
            std::string blob = std::to_string(code) + "\n" + out.str() + "\n" + err.str();
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) blob += "\n" + f.filename().string() + "\n" + slurp(f);
            // Paths differ between the two runs only through the directory name.
            for (auto at = blob.find(dir.string()); at != std::string::npos; at = blob.find(dir.string()))
                blob.replace(at, dir.string().size(), "@");
            captured[rep] = std::move(blob);
        }
        if (captured[0] != captured[1]) o.fail(commands[c][0] + " output differs between runs");
    }
    fs::remove_all(root);
    if (o.pass) o.detail = std::to_string(commands.size()) + " invocations reproduced byte for byte";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle optimality", oracle_optimality},
        {"Markov sufficiency", markov_sufficiency},
        {"W recursion equivalence", recursion_equivalence},
        {"risk functional axioms", risk_axioms},
        {"mean-variance approximation", mean_variance_approximation},
        {"risk-neutral limit", risk_neutral_limit},
        {"Monte Carlo consistency", monte_carlo_consistency},
        {"discretization convergence", discretization_convergence},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s [%zu] %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
