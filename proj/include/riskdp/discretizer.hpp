#pragma once

#include <string>
#include <vector>

#include "riskdp/model.hpp"

namespace riskdp {

/// x' = a x + b u + w, w ~ N(0, σ²), cost q_t x² + r_t u², terminal q_N x².
/// `q` and `r` hold either one weight for every stage or one weight per stage.
struct Affine1DSpec {
    Stage horizon = 1;
    double a = 1.0;
    double b = 0.0;
    double sigma = 1.0;
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::vector<double> controls;
    std::vector<double> q{0.0};
    std::vector<double> r{0.0};
    double q_terminal = 0.0;
};

struct GridSpec {
    std::int32_t state_points = 65;
    std::int32_t noise_atoms = 8;
};

struct GridLimits {
    std::int32_t max_state_points = 2048;
    std::int32_t max_noise_atoms = 64;
};

struct NoiseAtom {
    double value;
    double prob;
};

/// Standard normal quantile. Acklam's rational approximation refined by one
/// Halley step against std::erfc; absolute error below 1e-8 on (1e-6, 1 - 1e-6).
double inverse_normal_cdf(double p);

/// Equal-probability quantization: atom i = σ Φ⁻¹((i + 0.5) / k) with mass 1/k.
/// Atoms are exactly antisymmetric (w_i = -w_{k-1-i}).
std::vector<NoiseAtom> quantize_gaussian(double sigma, std::int32_t atoms);

/// Throws std::invalid_argument describing the first violated constraint.
void validate_affine1d(const Affine1DSpec& spec, const GridSpec& grid, const GridLimits& limits = {});

/// Uniform state grid on [x_lo, x_hi] (symmetric about the interval midpoint).
std::vector<double> state_grid(const Affine1DSpec& spec, std::int32_t points);

/// Finite model on the state grid. Successors are snapped to the nearest grid
/// point (ties go toward the grid centre) and clamped to the bounds.
FiniteModel discretize(const Affine1DSpec& spec, const GridSpec& grid, const GridLimits& limits = {});

struct ContinuousSpecFile {
    Affine1DSpec spec;
    GridSpec grid;
};

/// Parses {"family":"affine1d", "horizon", "a", "b", "sigma", "x_bounds":[lo,hi],
/// "controls":[...], "q", "r", "qN", "grid":{"state_points","noise_atoms"}}.
/// `q` and `r` may be numbers or per-stage arrays. Throws std::invalid_argument.
ContinuousSpecFile parse_affine1d_json(const std::string& text);

} // namespace riskdp
