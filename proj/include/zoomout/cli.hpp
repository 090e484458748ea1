#pragma once

#include <iosfwd>

namespace zoomout {

inline constexpr const char* kVersion = "1.0.0";

/// Entry point behind the `zoomout` executable. Subcommands: basis, convert,
/// zoomout, icp, eval, synth, experiment.
///
/// Exit codes: 0 success, 1 computation error, 2 usage or I/O error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zoomout
