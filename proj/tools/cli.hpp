#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "riskdp/model.hpp"

namespace riskdp::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kValidationError = 2,
    kCertifyFail = 3,
    kCapExceeded = 4,
};

/// Runs one command line (args[0] is the program name). Reports go to `out`,
/// diagnostics to `err`; files are written where the flags say.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Policy file: CSV with header `t,state,action`, one row per (t, state).
/// States and actions may be given by label or by index.
MarkovPolicy parse_policy_csv(const FiniteModel& m, const std::string& text);
std::string policy_to_csv(const FiniteModel& m, const MarkovPolicy& pi);

/// Resolves a state by label first, then by decimal index.
StateIndex resolve_state(const FiniteModel& m, const std::string& token);

/// 17 significant digits, shortest exponent form.
std::string format_real(double v);

} // namespace riskdp::cli
