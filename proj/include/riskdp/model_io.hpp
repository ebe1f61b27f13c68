#pragma once

#include <filesystem>
#include <string>

#include "riskdp/model.hpp"

namespace riskdp {

/// Malformed JSON or a document that does not have the model file layout.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadOptions {
    /// Rescale kernel rows whose sum is within 1e-9 of 1 (off by default).
    bool renormalize = false;
};

inline constexpr double kRenormalizeWindow = 1e-9;

/// Parses a model document: `horizon`, `states`/`actions`/`disturbances` label
/// arrays, `dynamics`/`kernel` as [t][x][u][w], `stage_cost` as [t][x][u],
/// `terminal_cost` as [x]. Shape errors throw FormatError; content is not validated.
FiniteModel parse_model_json(const std::string& text, const LoadOptions& options = {});
FiniteModel load_model_json(const std::filesystem::path& path, const LoadOptions& options = {});

std::string model_to_json(const FiniteModel& m);
void save_model_json(const FiniteModel& m, const std::filesystem::path& path);

} // namespace riskdp
