#include "riskdp/discretizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace riskdp {

namespace {

// Acklam's coefficients.
constexpr std::array<double, 6> kA{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};

double acklam(double p) {
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) return -acklam(1.0 - p);
    const double q = p - 0.5;
    const double r = q * q;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

std::string format_label(const char* prefix, double v) {
    std::ostringstream os;
    os.precision(10);
    os << prefix << v;
    return os.str();
}

std::vector<double> stage_weights(const nlohmann::json& node, Stage horizon, const char* name) {
    if (node.is_number()) return {node.get<double>()};
    if (node.is_array() && node.size() == static_cast<std::size_t>(horizon)) {
        std::vector<double> out;
        for (const auto& v : node) {
            if (!v.is_number()) throw std::invalid_argument(std::string("'") + name + "' entries must be numbers");
            out.push_back(v.get<double>());
        }
        return out;
    }
    throw std::invalid_argument(std::string("'") + name + "' must be a number or an array of length horizon");
}

double weight_at(const std::vector<double>& w, Stage t) { return w.size() == 1 ? w[0] : w[static_cast<std::size_t>(t)]; }

} // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs 0 < p < 1");
    double x = acklam(p);
    // Halley step on Φ(x) - p.
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

std::vector<NoiseAtom> quantize_gaussian(double sigma, std::int32_t atoms) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive and finite");
    if (atoms < 2) throw std::invalid_argument("noise quantization needs at least 2 atoms");
    const auto k = static_cast<std::size_t>(atoms);
    std::vector<NoiseAtom> out(k);
    const double mass = 1.0 / static_cast<double>(atoms);
    for (std::size_t i = 0; i < k / 2; ++i) {
        const double z = sigma * inverse_normal_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(atoms));
        out[i] = {z, mass};
        out[k - 1 - i] = {-z, mass};
    }
    if (k % 2 == 1) out[k / 2] = {0.0, mass};
    return out;
}

void validate_affine1d(const Affine1DSpec& spec, const GridSpec& grid, const GridLimits& limits) {
    if (spec.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (!std::isfinite(spec.a) || !std::isfinite(spec.b)) throw std::invalid_argument("a and b must be finite");
    if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) throw std::invalid_argument("sigma must be positive");
    if (!std::isfinite(spec.x_lo) || !std::isfinite(spec.x_hi) || !(spec.x_lo < spec.x_hi))
        throw std::invalid_argument("x_bounds must satisfy x_lo < x_hi");
    if (spec.controls.empty()) throw std::invalid_argument("control list must be non-empty");
    for (double u : spec.controls)
        if (!std::isfinite(u)) throw std::invalid_argument("controls must be finite");
    auto check_weights = [&](const std::vector<double>& w, const char* name) {
        if (w.size() != 1 && w.size() != static_cast<std::size_t>(spec.horizon))
            throw std::invalid_argument(std::string(name) + " must have one entry or one per stage");
        for (double v : w)
            if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    };
    check_weights(spec.q, "q");
    check_weights(spec.r, "r");
    if (!std::isfinite(spec.q_terminal) || spec.q_terminal < 0.0) throw std::invalid_argument("qN must be finite and >= 0");
    if (grid.state_points < 2 || grid.state_points > limits.max_state_points)
        throw std::invalid_argument("state_points must be in [2, " + std::to_string(limits.max_state_points) + "]");
    if (grid.noise_atoms < 2 || grid.noise_atoms > limits.max_noise_atoms)
        throw std::invalid_argument("noise_atoms must be in [2, " + std::to_string(limits.max_noise_atoms) + "]");
}

std::vector<double> state_grid(const Affine1DSpec& spec, std::int32_t points) {
    const double centre = 0.5 * (spec.x_lo + spec.x_hi);
    const double h = (spec.x_hi - spec.x_lo) / static_cast<double>(points - 1);
    const double mid = 0.5 * static_cast<double>(points - 1);
    std::vector<double> xs(static_cast<std::size_t>(points));
    for (std::int32_t i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = centre + (static_cast<double>(i) - mid) * h;
    return xs;
}

FiniteModel discretize(const Affine1DSpec& spec, const GridSpec& grid, const GridLimits& limits) {
    validate_affine1d(spec, grid, limits);
    const auto xs = state_grid(spec, grid.state_points);
    const auto noise = quantize_gaussian(spec.sigma, grid.noise_atoms);
    const std::int32_t n = grid.state_points;
    const double h = (spec.x_hi - spec.x_lo) / static_cast<double>(n - 1);
    const double mid = 0.5 * static_cast<double>(n - 1);

    auto snap = [&](double y) -> StateIndex {
        if (y <= xs.front()) return 0;
        if (y >= xs.back()) return n - 1;
        const auto guess = static_cast<std::int32_t>(std::lround((y - xs.front()) / h));
        StateIndex best = std::clamp(guess, 0, n - 1);
        for (std::int32_t i = std::max(0, guess - 1); i <= std::min(n - 1, guess + 1); ++i) {
            const double di = std::abs(y - xs[static_cast<std::size_t>(i)]);
            const double db = std::abs(y - xs[static_cast<std::size_t>(best)]);
            if (di < db || (di == db && std::abs(i - mid) < std::abs(best - mid))) best = i;
        }
        return best;
    };

    Dimensions d{spec.horizon, n, static_cast<std::int32_t>(spec.controls.size()), grid.noise_atoms};
    ModelBuilder builder(d);
    std::vector<std::string> state_labels, action_labels, noise_labels;
    for (double x : xs) state_labels.push_back(format_label("x=", x));
    for (double u : spec.controls) action_labels.push_back(format_label("u=", u));
    for (const auto& w : noise) noise_labels.push_back(format_label("w=", w.value));
    builder.state_labels(std::move(state_labels))
        .action_labels(std::move(action_labels))
        .disturbance_labels(std::move(noise_labels));

    for (Stage t = 0; t < d.horizon; ++t) {
        const double qt = weight_at(spec.q, t);
        const double rt = weight_at(spec.r, t);
        for (StateIndex i = 0; i < n; ++i) {
            const double x = xs[static_cast<std::size_t>(i)];
            for (ActionIndex j = 0; j < d.actions; ++j) {
                const double u = spec.controls[static_cast<std::size_t>(j)];
                builder.stage_cost(t, i, j, qt * x * x + rt * u * u);
                const double drift = spec.a * x + spec.b * u;
                for (DisturbanceIndex k = 0; k < d.disturbances; ++k) {
                    const auto& w = noise[static_cast<std::size_t>(k)];
                    builder.transition(t, i, j, k, snap(drift + w.value), w.prob);
                }
            }
        }
    }
    for (StateIndex i = 0; i < n; ++i) {
        const double x = xs[static_cast<std::size_t>(i)];
        builder.terminal_cost(i, spec.q_terminal * x * x);
    }
    auto model = builder.build();
    require_valid(model);
    return model;
}

ContinuousSpecFile parse_affine1d_json(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("spec file is not valid JSON: ") + e.what());
    }
    auto get = [&](const char* name) -> const json& {
        auto it = doc.find(name);
        if (it == doc.end()) throw std::invalid_argument(std::string("spec file is missing field '") + name + "'");
        return *it;
    };
    auto num = [&](const char* name) {
        const json& v = get(name);
        if (!v.is_number()) throw std::invalid_argument(std::string("'") + name + "' must be a number");
        return v.get<double>();
    };
    if (!doc.is_object()) throw std::invalid_argument("spec file must be a JSON object");
    if (get("family") != "affine1d") throw std::invalid_argument("unsupported family (expected \"affine1d\")");

    ContinuousSpecFile out;
    const json& h = get("horizon");
    if (!h.is_number_integer() || h.get<long long>() < 1) throw std::invalid_argument("'horizon' must be a positive integer");
    out.spec.horizon = static_cast<Stage>(h.get<long long>());
    out.spec.a = num("a");
    out.spec.b = num("b");
    out.spec.sigma = num("sigma");
    const json& bounds = get("x_bounds");
    if (!bounds.is_array() || bounds.size() != 2 || !bounds[0].is_number() || !bounds[1].is_number())
        throw std::invalid_argument("'x_bounds' must be [lo, hi]");
    out.spec.x_lo = bounds[0].get<double>();
    out.spec.x_hi = bounds[1].get<double>();
    const json& controls = get("controls");
    if (!controls.is_array()) throw std::invalid_argument("'controls' must be an array");
    for (const auto& u : controls) {
        if (!u.is_number()) throw std::invalid_argument("'controls' entries must be numbers");
        out.spec.controls.push_back(u.get<double>());
    }
    out.spec.q = stage_weights(get("q"), out.spec.horizon, "q");
    out.spec.r = stage_weights(get("r"), out.spec.horizon, "r");
    out.spec.q_terminal = num("qN");
    const json& grid = get("grid");
    if (!grid.is_object() || !grid.contains("state_points") || !grid.contains("noise_atoms") ||
        !grid["state_points"].is_number_integer() || !grid["noise_atoms"].is_number_integer())
        throw std::invalid_argument("'grid' must hold integer 'state_points' and 'noise_atoms'");
    out.grid.state_points = static_cast<std::int32_t>(grid["state_points"].get<long long>());
    out.grid.noise_atoms = static_cast<std::int32_t>(grid["noise_atoms"].get<long long>());
    validate_affine1d(out.spec, out.grid);
    return out;
}

} // namespace riskdp
