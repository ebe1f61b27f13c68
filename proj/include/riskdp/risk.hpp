#pragma once

#include <span>
#include <utility>
#include <vector>

namespace riskdp {

/// Risk-aversion parameter θ < 0. Larger |θ| weights the upper cost tail more heavily.
class RiskParam {
public:
    /// Throws std::invalid_argument unless θ is finite, negative and |θ| >= 1e-12.
    explicit RiskParam(double theta);

    double theta() const noexcept { return theta_; }
    /// k = -θ/2 > 0, the exponent scale in e^{k Z}.
    double exponent_scale() const noexcept { return -0.5 * theta_; }

    friend bool operator==(const RiskParam&, const RiskParam&) = default;

private:
    double theta_;
};

struct CostAtom {
    double value;
    double prob;
};

/// Finite law of a cost: (value, probability) atoms with probabilities summing to one.
class CostDistribution {
public:
    /// Throws std::invalid_argument on empty input, negative probabilities, non-finite
    /// values, or |Σ p - 1| > tolerance.
    explicit CostDistribution(std::vector<CostAtom> atoms, double tolerance = 1e-12);

    static CostDistribution deterministic(double value) { return CostDistribution({{value, 1.0}}); }

    const std::vector<CostAtom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }

    /// Copy with every value shifted by `offset`.
    CostDistribution shifted(double offset) const;

private:
    std::vector<CostAtom> atoms_;
};

double expectation(const CostDistribution& dist);
/// Exact two-pass variance over the atoms.
double variance(const CostDistribution& dist);

/**
 * Exponential-utility certainty equivalent
 *
 *   rho_θ(Z) = (-2/θ) log E[exp((-θ/2) Z)].
 *
 * Evaluated with a max shift m over atoms of positive probability:
 *   rho = m + (-2/θ) log Σ p_i exp((-θ/2)(z_i - m)),
 * so every exponent is <= 0.
 */
double entropic_risk(const CostDistribution& dist, const RiskParam& rp);

/// Small-|θ| approximation E[Z] - (θ/4) Var[Z].
double mean_variance_approx(const CostDistribution& dist, const RiskParam& rp);

/// (1/k) log Σ_i p_i exp(k z_i) for k > 0, max-shifted over entries with p_i > 0.
/// Weights are divided by their sum, so a constant input returns that constant
/// exactly. Entries are accumulated in index order. Requires at least one positive weight.
double scaled_log_sum_exp(std::span<const double> values, std::span<const double> probs, double k);

} // namespace riskdp
