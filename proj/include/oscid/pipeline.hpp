#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oscid/dmd.hpp"
#include "oscid/ingest.hpp"
#include "oscid/modes.hpp"
#include "oscid/mrdmd.hpp"
#include "oscid/siggen.hpp"

namespace oscid {

struct EmitFlags {
  bool report = true;
  bool levels = true;
  bool eigenvalues = true;
  bool plan = true;
};

// Everything the `analyze` and `generate` subcommands need. Exactly one of
// input / profile is set.
struct RunConfig {
  std::optional<std::filesystem::path> input;
  std::optional<std::string> profile;
  std::optional<std::string> channel;
  bool joint = false;  // stack all channels before delay embedding
  IngestConfig ingest;
  std::optional<std::size_t> stack_depth;
  TruncationRule rule;
  int mu = 16;
  Rational g{4};
  std::optional<int> termination_level;
  double critical_band = kDefaultCriticalBand;
  std::filesystem::path output_dir = "oscid-out";
  EmitFlags emit;
  // Generator overrides for profiles.
  std::optional<std::uint64_t> seed;
  std::optional<double> noise_std;
  // Optional gap injected after loading.
  std::size_t gap_start = 0;
  std::size_t gap_length = 0;
  unsigned threads = 1;
  // Correct aliased MR-DMD eigenvalues using the delay structure of the modes.
  bool dealias = true;

  // Throws on contradictory or out-of-range settings, before any work.
  void validate() const;
};

struct Dataset {
  SignalRecord record;
  std::string source;                       // "profile:<name>" or the input path
  std::optional<GeneratorConfig> generator;  // ground truth for profiles
};

Dataset load_dataset(const RunConfig& config);

// Analysis window shared by both methods: the first `columns` snapshot
// columns, whose first row is record samples [0, columns).
struct Window {
  Eigen::Index columns = 0;
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<double> measured;
  std::vector<bool> missing;
};

struct ReconstructionError {
  double rmse = 0.0;
  double signal_rms = 0.0;
  std::size_t samples = 0;  // non-missing samples compared
};

// RMSE of `estimate` against the window's measured samples, skipping missing
// ones. nullopt when every sample is missing.
std::optional<ReconstructionError> reconstruction_error(const Window& window,
                                                        const Eigen::Ref<const Eigen::RowVectorXd>& estimate);

enum class Verdict { stable, sustained_oscillation, unstable, undetermined };
std::string_view to_string(Verdict verdict) noexcept;
Verdict verdict_for(const ModeReport* dominant) noexcept;

struct DmdAnalysis {
  Window window;
  std::string channel;
  std::size_t stack_depth = 0;
  Eigen::Index rows = 0;
  std::optional<DmdResult> result;  // empty when identification failed
  std::string failure;
  std::vector<ModeReport> modes;
  Eigen::RowVectorXd reconstruction;  // first row, window columns
  std::optional<ReconstructionError> error;

  const ModeReport* dominant() const;
};

struct MrdmdAnalysis {
  Window window;
  std::string channel;
  std::size_t stack_depth = 0;
  Eigen::Index rows = 0;
  MrdmdResult result;
  std::optional<ReconstructionError> error;

  const ModeReport* dominant() const;
};

// Channel groups to analyze: one group per channel, or a single group of all
// channels for joint analysis.
std::vector<std::vector<std::string>> channel_groups(const SignalRecord& record,
                                                     const RunConfig& config);

DmdAnalysis analyze_dmd(const SignalRecord& record, std::span<const std::string> channels,
                        const RunConfig& config);
MrdmdAnalysis analyze_mrdmd(const SignalRecord& record, std::span<const std::string> channels,
                            const RunConfig& config);

// Subcommand bodies. Each writes its artifacts under config.output_dir and
// returns the process exit status.
int run_dmd(const RunConfig& config);
int run_mrdmd(const RunConfig& config);
int run_compare(const RunConfig& config);
int run_generate(const RunConfig& config, const std::filesystem::path& output);
// Plan for an explicit (n, dt) when both are given, else for the dataset.
int run_plan(const RunConfig& config, std::optional<std::int64_t> n, std::optional<double> dt);

// 17 significant digits, scientific notation.
std::string csv_number(double value);

}  // namespace oscid
