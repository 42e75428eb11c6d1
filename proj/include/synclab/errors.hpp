#pragma once

#include <stdexcept>
#include <string>

namespace synclab {

// Numerical breakdown at runtime: solver failure, cascade overflow, phase floor breach,
// potential evaluated outside its invertibility domain mid-run.  CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// The exact stroboscopic map left its validity regime (an intermediate phase reached
// threshold, or a supra-threshold arrival occurred).  Callers that need the true dynamics
// should fall back to the event simulator.  Treated as a precondition error by the CLI.
struct RegimeError : std::invalid_argument {
  explicit RegimeError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace synclab
