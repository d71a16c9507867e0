#pragma once

#include <cstdint>
#include <iosfwd>

namespace co2fuse::cli {

// Sub-seeds derived from --seed.
inline constexpr std::uint64_t kSynthSeedOffset = 1000;
inline constexpr std::uint64_t kTrainSeedOffset = 2000;
inline constexpr std::uint64_t kImportanceSeedOffset = 3000;

/// Runs one subcommand and returns the process exit code: 0 success, 2 input or
/// schema error, 3 empty data, 64 usage error, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace co2fuse::cli
