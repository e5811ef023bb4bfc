#include "golden.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>

#include "oscid/pipeline.hpp"

namespace oscid::testing {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RunConfig golden_config(const std::filesystem::path& golden_dir) {
  RunConfig config;
  config.input = golden_dir / "input.csv";
  config.ingest.time_column = true;
  config.stack_depth = 40;
  config.mu = 8;
  return config;
}

}  // namespace

std::string compare_golden(const std::filesystem::path& golden_dir, const std::filesystem::path& out) {
  const char* update = std::getenv("OSCID_UPDATE_GOLDEN");
  const bool rewrite = update && std::string(update) == "1";
  std::string differences;
  for (const std::string method : {"dmd", "mrdmd"}) {
    auto config = golden_config(golden_dir);
    config.output_dir = rewrite ? golden_dir / "expected" / method : out / method;
    std::filesystem::remove_all(config.output_dir);
    if (method == "dmd") {
      run_dmd(config);
    } else {
      run_mrdmd(config);
    }
    if (rewrite) continue;
    const auto expected_dir = golden_dir / "expected" / method;
    for (const auto& entry : std::filesystem::directory_iterator(expected_dir)) {
      const auto name = entry.path().filename();
      // report.json embeds the input path, which differs between checkouts.
      if (name == "report.json") continue;
      const auto produced = config.output_dir / name;
      if (!std::filesystem::exists(produced)) {
        differences += method + "/" + name.string() + " missing; ";
      } else if (read_file(produced) != read_file(entry.path())) {
        differences += method + "/" + name.string() + " differs; ";
      }
    }
  }
  return differences;
}

}  // namespace oscid::testing
