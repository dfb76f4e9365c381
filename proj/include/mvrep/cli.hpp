#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mvrep::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kConfigError = 2 };

/// Runs `mvrep <subcommand> ...` with argv[0] the program name. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct AreaStats {
  std::string area;
  std::size_t originals = 0;     // rooms
  std::size_t partial_sets = 0;  // multi-view partial sets
};

/// One row per area, sorted by area name. Throws ParseError naming a corrupt manifest.
std::vector<AreaStats> collect_stats(const std::vector<std::filesystem::path>& manifests);

/// Fixed-width table: header "Area Original MV", one row per area, then a "Total" row.
std::string format_stats_table(const std::vector<AreaStats>& rows);

}  // namespace mvrep::cli
