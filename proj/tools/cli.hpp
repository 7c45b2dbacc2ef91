#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "svt/svt.hpp"

namespace svt::cli {

// sysexits codes used alongside the flag values 0..3
inline constexpr int kExitUsage = 64;
inline constexpr int kExitDataErr = 65;
inline constexpr int kExitIoErr = 74;

/// Loads U.mtx, S.txt and V.mtx from `dir`. A directory without any of the
/// three files yields nullopt (cold start). Throws UsageError on partial or
/// inconsistent contents, std::ios_base::failure if `dir` cannot be read.
std::optional<PartialSvd> load_psvd(const std::filesystem::path& dir);

/// Writes U.mtx and V.mtx (array format) and S.txt into `dir`, creating it.
void save_psvd(const std::filesystem::path& dir, const PartialSvd& p);

/// The three front-ends. Output goes to `out`, diagnostics to `err`; the
/// return value is the process exit code.
int run_svt(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_svt_mc(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_svt_compress(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svt::cli
