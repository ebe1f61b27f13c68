#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>

#include "riskdp/oracle.hpp"
#include "riskdp/solver.hpp"
#include "support/instances.hpp"

using namespace riskdp;
using namespace riskdp::testing;

TEST_CASE("policy counts") {
    const auto m = random_instance(1, {.max_states = 2, .max_actions = 2, .max_disturbances = 2, .max_horizon = 2, .exact = true});
    CHECK(markov_policy_count(m) == 16);
    CHECK(HistoryPolicy::table_size(2, 2) == 6);
    CHECK(history_policy_count(m) == 64);
    const auto big = random_instance(1, {.max_states = 3, .max_actions = 3, .max_disturbances = 1, .max_horizon = 40, .exact = true});
    CHECK(markov_policy_count(big) == UINT64_MAX);
    CHECK(history_policy_count(big) == UINT64_MAX);
}

TEST_CASE("HistoryPolicy indexes histories with x_0 most significant") {
    // N = 2, |S| = 2: entries [h=(0), h=(1), h=(0,0), h=(0,1), h=(1,0), h=(1,1)].
    const HistoryPolicy p(2, 2, {0, 1, 1, 0, 0, 1});
    const std::vector<StateIndex> h0{1}, h1{0, 1}, h2{1, 1};
    CHECK(p(h0) == 1);
    CHECK(p(h1) == 0);
    CHECK(p(h2) == 1);
    CHECK_THROWS_AS(HistoryPolicy(2, 2, {0, 1}), std::invalid_argument);
}

TEST_CASE("brute_force_markov on the one-policy model") {
    ModelBuilder b({1, 1, 1, 1});
    b.transition(0, 0, 0, 0, 0, 1.0).stage_cost(0, 0, 0, 2.5).terminal_cost(0, 0.5);
    const auto r = brute_force_markov(b.build(), RiskParam(-1.0), 0);
    CHECK(r.best_value == 3.0);
    REQUIRE(r.optimal_policies.size() == 1);
    CHECK(r.optimal_policies[0] == MarkovPolicy::constant(1, 1));
}

TEST_CASE("brute_force_markov on the flip instance") {
    const auto r = brute_force_markov(flip_instance(), RiskParam(-1.0), 0);
    CHECK(r.best_value == 2.0);
    // Every optimal policy picks b at s0; actions at the other states are free.
    CHECK(r.optimal_policies.size() == 8);
    for (const auto& pi : r.optimal_policies) CHECK(pi(0, 0) == 1);
    CHECK(std::is_sorted(r.optimal_policies.begin(), r.optimal_policies.end(),
                         [](const MarkovPolicy& a, const MarkovPolicy& b) { return a.table() < b.table(); }));
}

TEST_CASE("brute_force_markov agrees with backward induction on random instances") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto m = random_instance(seed, {.max_states = 3, .max_actions = 2, .max_disturbances = 3, .max_horizon = 3, .exact = true});
        const RiskParam rp(-1.0);
        const auto dp = solve_exputil(m, rp);
        const auto bf = brute_force_markov(m, rp, 0);
        CHECK(std::abs(bf.best_value - dp.values(0, 0)) <= 1e-9);
        CHECK(std::find(bf.optimal_policies.begin(), bf.optimal_policies.end(), dp.policy) != bf.optimal_policies.end());
    }
}

TEST_CASE("brute-force caps are enforced, never truncated") {
    const auto m = random_instance(2, {.max_states = 3, .max_actions = 2, .max_disturbances = 2, .max_horizon = 3, .exact = true});
    CHECK_THROWS_AS(brute_force_markov(m, RiskParam(-1.0), 0, {.max_markov_policies = 511}), CapExceeded);
    CHECK_NOTHROW(brute_force_markov(m, RiskParam(-1.0), 0, {.max_markov_policies = 512}));
    CHECK_THROWS_AS(brute_force_history(m, RiskParam(-1.0), 0), CapExceeded);
    CHECK_THROWS_AS(certify(m, RiskParam(-1.0), 0, {.max_markov_policies = 100}), CapExceeded);
}

TEST_CASE("history oracle collapses to the Markov value on deterministic kernels") {
    for (std::uint64_t seed = 40; seed < 50; ++seed) {
        const auto m = random_instance(seed, {.max_states = 2, .max_actions = 2, .max_disturbances = 1, .max_horizon = 2, .exact = true});
        const RiskParam rp(-1.0);
        CHECK(std::abs(brute_force_history(m, rp, 0) - brute_force_markov(m, rp, 0).best_value) <= 1e-12);
    }
}

TEST_CASE("history optimum never beats the Markov optimum") {
    for (std::uint64_t seed = 60; seed < 100; ++seed) {
        const auto m = random_instance(seed, {.max_states = 2, .max_actions = 2, .max_disturbances = 2, .max_horizon = 2, .exact = true});
        for (double th : {-0.5, -2.0}) {
            const RiskParam rp(th);
            const double history = brute_force_history(m, rp, 0);
            const double markov = brute_force_markov(m, rp, 0).best_value;
            CHECK(history <= markov + 1e-12);
            CHECK(std::abs(history - markov) <= 1e-9);
        }
    }
}

TEST_CASE("history policy evaluation matches Markov evaluation for Markov-shaped tables") {
    const auto m = random_instance(77, {.max_states = 2, .max_actions = 2, .max_disturbances = 2, .max_horizon = 2, .exact = true});
    const auto pi = random_policy(m, 77);
    // Embed pi: stage-0 entries by x_0, stage-1 entries by the last state only.
    const HistoryPolicy h(2, 2, {pi(0, 0), pi(0, 1), pi(1, 0), pi(1, 1), pi(1, 0), pi(1, 1)});
    const RiskParam rp(-1.3);
    CHECK(std::abs(evaluate_history_policy(m, h, rp, 0) - evaluate_policy(m, pi, rp, 0)) <= 1e-12);
}

TEST_CASE("certify") {
    SUBCASE("flip instance passes at value 2") {
        const auto c = certify(flip_instance(), RiskParam(-1.0), 0);
        CHECK(c.pass);
        CHECK(c.dp_value == 2.0);
        CHECK(c.markov_value == 2.0);
        CHECK(c.history_value == 2.0);
        CHECK(c.dp_policy_optimal);
    }
    SUBCASE("zero-cost model passes at value 0") {
        const auto m = random_instance(5, {.max_states = 2, .max_actions = 2, .max_disturbances = 2, .max_horizon = 2, .exact = true,
                                           .cost_lo = 0.0, .cost_hi = 0.0});
        const auto c = certify(m, RiskParam(-1.0), 0);
        CHECK(c.pass);
        CHECK(std::abs(c.dp_value) <= 1e-14);
        CHECK(std::abs(c.history_value) <= 1e-14);
    }
    SUBCASE("random instances pass") {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto m = random_instance(seed, {.max_states = 2, .max_actions = 2, .max_disturbances = 3, .max_horizon = 2});
            CHECK(certify(m, RiskParam(-0.5 - static_cast<double>(seed % 4)), 0).pass);
        }
    }
}
