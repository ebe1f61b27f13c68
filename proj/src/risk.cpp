#include "riskdp/risk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskdp {

RiskParam::RiskParam(double theta) : theta_(theta) {
    if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
    if (!(theta < 0.0)) throw std::invalid_argument("theta must be strictly negative (risk-averse)");
    if (std::abs(theta) < 1e-12) throw std::invalid_argument("|theta| must be at least 1e-12");
}

CostDistribution::CostDistribution(std::vector<CostAtom> atoms, double tolerance) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("cost distribution must have at least one atom");
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.value)) throw std::invalid_argument("cost values must be finite");
        if (!std::isfinite(a.prob) || a.prob < 0.0) throw std::invalid_argument("probabilities must be >= 0");
        total += a.prob;
    }
    if (std::abs(total - 1.0) > tolerance) throw std::invalid_argument("probabilities must sum to 1");
}

CostDistribution CostDistribution::shifted(double offset) const {
    auto atoms = atoms_;
    for (auto& a : atoms) a.value += offset;
    return CostDistribution(std::move(atoms), std::numeric_limits<double>::infinity());
}

double expectation(const CostDistribution& dist) {
    double mean = 0.0;
    for (const auto& a : dist.atoms()) mean += a.prob * a.value;
    return mean;
}

double variance(const CostDistribution& dist) {
    const double mean = expectation(dist);
    double var = 0.0;
    for (const auto& a : dist.atoms()) {
        const double d = a.value - mean;
        var += a.prob * d * d;
    }
    return var;
}

double scaled_log_sum_exp(std::span<const double> values, std::span<const double> probs, double k) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probs[i] > 0.0 && values[i] > shift) shift = values[i];
    if (shift == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("log-sum-exp needs at least one positive weight");
    double sum = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probs[i] > 0.0) {
            sum += probs[i] * std::exp(k * (values[i] - shift));
            mass += probs[i];
        }
    return shift + std::log(sum / mass) / k;
}

double entropic_risk(const CostDistribution& dist, const RiskParam& rp) {
    std::vector<double> values, probs;
    values.reserve(dist.size());
    probs.reserve(dist.size());
    for (const auto& a : dist.atoms()) {
        values.push_back(a.value);
        probs.push_back(a.prob);
    }
    return scaled_log_sum_exp(values, probs, rp.exponent_scale());
}

double mean_variance_approx(const CostDistribution& dist, const RiskParam& rp) {
    return expectation(dist) - 0.25 * rp.theta() * variance(dist);
}

} // namespace riskdp
