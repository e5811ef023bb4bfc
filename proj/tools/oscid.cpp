// oscid: oscillation-mode identification from the command line.
//
//   oscid analyze dmd|mrdmd|compare|plan [options]
//   oscid generate --profile NAME --out FILE
//
// Every option can also come from a TOML/INI file given with --config, or
// from an environment variable OSCID_<OPTION> (upper case, dashes become
// underscores, e.g. OSCID_STACK=1000).

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oscid/error.hpp"
#include "oscid/pipeline.hpp"

namespace {

struct Options {
  std::optional<std::string> input;
  std::optional<std::string> profile;
  std::optional<std::string> channel;
  bool joint = false;
  std::optional<double> dt;
  std::optional<double> t0;
  bool time_column = false;
  bool no_header = false;
  std::string fill = "zero";
  std::optional<std::size_t> stack;
  std::optional<long long> rank;
  std::optional<double> energy;
  std::optional<double> sv_ratio;
  int mu = 16;
  std::string g = "4";
  std::optional<int> termination_level;
  double critical_band = oscid::kDefaultCriticalBand;
  std::string out = "oscid-out";
  std::vector<std::string> emit;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::size_t gap_start = 0;
  std::size_t gap_length = 0;
  unsigned threads = 1;
  bool no_dealias = false;
  std::optional<std::int64_t> n;
};

std::string env_name(const std::string& flag) {
  std::string out = "OSCID_";
  for (char c : flag) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

template <typename T>
CLI::Option* add(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
  return app->add_option("--" + flag, target, help)->envname(env_name(flag));
}

CLI::Option* add_flag(CLI::App* app, const std::string& flag, bool& target, const std::string& help) {
  return app->add_flag("--" + flag, target, help)->envname(env_name(flag));
}

void add_source_options(CLI::App* app, Options& o) {
  auto* input = add(app, "input", o.input, "CSV file to analyze");
  auto* profile = add(app, "profile", o.profile, "built-in synthetic profile (lfo_udc, ac_in)");
  input->excludes(profile);
  add(app, "channel", o.channel, "analyze only this channel");
  add_flag(app, "joint", o.joint, "stack all channels before delay embedding");
  add(app, "dt", o.dt, "sample interval in seconds");
  add(app, "t0", o.t0, "start time in seconds");
  add_flag(app, "time-column", o.time_column, "first CSV column holds time stamps");
  add_flag(app, "no-header", o.no_header, "CSV has no header row");
  add(app, "fill", o.fill, "missing-sample fill: zero or hold-last");
  add(app, "seed", o.seed, "generator seed override");
  add(app, "noise", o.noise, "generator noise standard deviation override");
  add(app, "gap-start", o.gap_start, "first sample of an injected gap");
  add(app, "gap-length", o.gap_length, "length of an injected gap in samples");
}

void add_analysis_options(CLI::App* app, Options& o) {
  add(app, "stack", o.stack, "delay-embedding depth (default: length / 5)");
  auto* rank = add(app, "rank", o.rank, "fixed truncation rank");
  auto* energy = add(app, "energy", o.energy, "keep this fraction of singular-value energy (default 0.9999)");
  auto* ratio = add(app, "sv-ratio", o.sv_ratio, "keep singular values above this fraction of the largest");
  rank->excludes(energy)->excludes(ratio);
  energy->excludes(ratio);
  add(app, "mu", o.mu, "samples per bin for MR-DMD")->capture_default_str();
  add(app, "g", o.g, "slow-mode factor, rho = pi / g")->capture_default_str();
  add(app, "termination-level", o.termination_level, "deepest MR-DMD level");
  add(app, "critical-band", o.critical_band, "|growth rate| below this is critical (1/s)")->capture_default_str();
  add(app, "out", o.out, "output directory")->capture_default_str();
  add(app, "emit", o.emit, "artifacts to write: report, levels, eigenvalues, plan (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember({"report", "levels", "eigenvalues", "plan"}));
  add(app, "threads", o.threads, "worker threads for MR-DMD sibling bins")->capture_default_str();
  add_flag(app, "no-dealias", o.no_dealias, "screen MR-DMD modes on the principal log branch only");
}

oscid::RunConfig to_config(const Options& o) {
  oscid::RunConfig config;
  if (o.input) config.input = *o.input;
  config.profile = o.profile;
  config.channel = o.channel;
  config.joint = o.joint;
  config.ingest.header = !o.no_header;
  config.ingest.time_column = o.time_column;
  config.ingest.dt = o.dt;
  if (o.t0) config.ingest.t0 = *o.t0;
  config.ingest.fill = oscid::parse_fill_policy(o.fill);
  config.stack_depth = o.stack;
  if (o.rank) {
    if (*o.rank < 1) throw oscid::Error(oscid::ErrorCode::invalid_argument, "rank must be at least 1");
    config.rule = oscid::TruncationRule::fixed_rank(static_cast<Eigen::Index>(*o.rank));
  } else if (o.energy) {
    config.rule = oscid::TruncationRule::energy_fraction(*o.energy);
  } else if (o.sv_ratio) {
    config.rule = oscid::TruncationRule::singular_value_ratio(*o.sv_ratio);
  }
  config.mu = o.mu;
  config.g = oscid::Rational::parse(o.g);
  config.termination_level = o.termination_level;
  config.critical_band = o.critical_band;
  config.output_dir = o.out;
  if (!o.emit.empty()) {
    config.emit = {false, false, false, false};
    for (const auto& item : o.emit) {
      if (item == "report") config.emit.report = true;
      if (item == "levels") config.emit.levels = true;
      if (item == "eigenvalues") config.emit.eigenvalues = true;
      if (item == "plan") config.emit.plan = true;
    }
  }
  config.seed = o.seed;
  config.noise_std = o.noise;
  config.gap_start = o.gap_start;
  config.gap_length = o.gap_length;
  config.threads = o.threads;
  config.dealias = !o.no_dealias;
  return config;
}

int fail(std::string_view code, const std::string& message) {
  std::string line = message;
  for (auto& c : line) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error: " << code << ": " << line << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oscillation-mode identification with DMD and multi-resolution DMD", "oscid"};
  app.set_config("--config", "", "read options from a TOML/INI file");
  app.require_subcommand(1);
  Options o;
  std::string generate_out;

  auto* analyze = app.add_subcommand("analyze", "run an analysis");
  analyze->require_subcommand(1);
  auto* dmd = analyze->add_subcommand("dmd", "single-window DMD");
  auto* mrdmd = analyze->add_subcommand("mrdmd", "multi-resolution DMD");
  auto* compare = analyze->add_subcommand("compare", "DMD against MR-DMD on the same data");
  auto* plan = analyze->add_subcommand("plan", "print the MR-DMD level plan");
  for (auto* sub : {dmd, mrdmd, compare, plan}) {
    add_source_options(sub, o);
    add_analysis_options(sub, o);
  }
  add(plan, "n", o.n, "snapshot columns (with --dt, plans without data)");

  auto* generate = app.add_subcommand("generate", "write a synthetic profile as CSV");
  add_source_options(generate, o);
  add(generate, "out", generate_out, "output CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("invalid_argument", e.what());
  }

  try {
    auto config = to_config(o);
    if (*dmd) return oscid::run_dmd(config);
    if (*mrdmd) return oscid::run_mrdmd(config);
    if (*compare) return oscid::run_compare(config);
    if (*plan) {
      std::optional<double> dt = o.n ? o.dt : std::nullopt;
      if (o.n && !o.dt && !o.input && !o.profile) {
        throw oscid::Error(oscid::ErrorCode::invalid_argument, "--n needs --dt or a data source");
      }
      if (o.n && o.dt) return oscid::run_plan(config, o.n, dt);
      return oscid::run_plan(config, o.n, std::nullopt);
    }
    if (*generate) return oscid::run_generate(config, generate_out);
  } catch (const oscid::Error& e) {
    return fail(oscid::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail("io", e.what());
  }
  return 0;
}
