#pragma once

#include <filesystem>
#include <string>

namespace oscid::testing {

// Runs the fixed golden configuration (dmd and mrdmd on golden/input.csv)
// into `out`. Returns the list of differences against the checked-in
// expected files, empty when every artifact is byte-identical. With
// OSCID_UPDATE_GOLDEN=1 in the environment the expected files are rewritten
// instead.
std::string compare_golden(const std::filesystem::path& golden_dir, const std::filesystem::path& out);

}  // namespace oscid::testing
