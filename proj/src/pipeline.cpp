#include "oscid/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>

#include "json.hpp"

#include "oscid/error.hpp"
#include "oscid/stacking.hpp"

namespace oscid {
namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

std::string rule_kind(const TruncationRule& rule) {
  switch (rule.kind) {
    case TruncationRule::Kind::fixed_rank: return "fixed-rank";
    case TruncationRule::Kind::energy_fraction: return "energy-fraction";
    case TruncationRule::Kind::singular_value_ratio: return "singular-value-ratio";
  }
  return "unknown";
}

std::string join(std::span<const std::string> names) {
  std::string out;
  for (const auto& name : names) out += (out.empty() ? "" : "+") + name;
  return out;
}

Window make_window(const SignalRecord& record, const std::string& channel, Eigen::Index columns) {
  Window window;
  window.columns = columns;
  window.dt = record.dt();
  window.t0 = record.t0();
  const auto& source = record.channel(channel);
  window.measured.assign(source.values.begin(), source.values.begin() + columns);
  window.missing.assign(source.missing.begin(), source.missing.begin() + columns);
  return window;
}

std::size_t resolve_depth(const SignalRecord& record, const RunConfig& config) {
  return config.stack_depth.value_or(default_stack_depth(record.length()));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  return out;
}

void write_json(const std::filesystem::path& path, const json& value) {
  auto out = open_output(path);
  out << value.dump(2) << '\n';
}

json complex_json(Complex value) { return json::array({value.real(), value.imag()}); }

json mode_json(const ModeReport& mode) {
  return json{{"level", mode.level},
              {"bin", mode.bin},
              {"frequency_hz", mode.frequency_hz},
              {"growth_rate", mode.growth_rate},
              {"damping", std::string(to_string(mode.damping))},
              {"lambda", complex_json(mode.lambda)},
              {"omega", complex_json(mode.omega)},
              {"amplitude", mode.amplitude},
              {"integral_contribution", mode.integral_contribution},
              {"pair", mode.pair},
              {"slow", mode.slow},
              {"reliable", mode.reliable}};
}

json optional_mode_json(const ModeReport* mode) { return mode ? mode_json(*mode) : json(nullptr); }

json error_json(const std::optional<ReconstructionError>& error) {
  if (!error) return json(nullptr);
  return json{{"rmse", error->rmse},
              {"signal_rms", error->signal_rms},
              {"relative_rmse", error->signal_rms > 0.0 ? json(error->rmse / error->signal_rms) : json(nullptr)},
              {"samples", error->samples}};
}

json stability_json(const std::vector<ModeReport>& modes, const ModeReport* dominant) {
  std::size_t growing = 0;
  for (const auto& mode : modes) {
    if (mode.slow && mode.oscillatory && mode.reliable && mode.damping == DampingClass::growing) ++growing;
  }
  return json{{"verdict", std::string(to_string(verdict_for(dominant)))},
              {"reliable_growing_modes", growing}};
}

json input_json(const Dataset& data, const std::string& channel) {
  std::size_t missing = 0;
  for (std::size_t c = 0; c < data.record.channel_count(); ++c) missing += data.record.missing_count(c);
  return json{{"source", data.source},
              {"channel", channel},
              {"samples", data.record.length()},
              {"dt", data.record.dt()},
              {"t0", data.record.t0()},
              {"missing_samples", missing}};
}

void write_modes_csv(const std::filesystem::path& path, std::vector<ModeReport> modes, bool tagged) {
  std::sort(modes.begin(), modes.end(),
            [](const ModeReport& a, const ModeReport& b) { return a.dominant_rank < b.dominant_rank; });
  auto out = open_output(path);
  out << "rank,";
  if (tagged) out << "level,bin,";
  out << "lambda_re,lambda_im,omega_re,omega_im,frequency_hz,damping,amplitude,integral_contribution,pair,"
         "slow,reliable\n";
  for (const auto& m : modes) {
    out << m.dominant_rank << ',';
    if (tagged) out << m.level << ',' << m.bin << ',';
    out << csv_number(m.lambda.real()) << ',' << csv_number(m.lambda.imag()) << ','
        << csv_number(m.omega.real()) << ',' << csv_number(m.omega.imag()) << ','
        << csv_number(m.frequency_hz) << ',' << to_string(m.damping) << ',' << csv_number(m.amplitude) << ','
        << csv_number(m.integral_contribution) << ',' << (m.pair ? 1 : 0) << ',' << (m.slow ? 1 : 0) << ','
        << (m.reliable ? 1 : 0) << '\n';
  }
}

void write_reconstruction_csv(const std::filesystem::path& path, const Window& window,
                              const Eigen::Ref<const Eigen::RowVectorXd>& estimate) {
  auto out = open_output(path);
  out << "t,measured,reconstructed\n";
  for (Eigen::Index j = 0; j < window.columns; ++j) {
    const auto i = static_cast<std::size_t>(j);
    out << csv_number(window.t0 + static_cast<double>(j) * window.dt) << ','
        << (window.missing[i] ? std::string("NaN") : csv_number(window.measured[i])) << ','
        << csv_number(estimate(j)) << '\n';
  }
}

void write_series_csv(const std::filesystem::path& path, const Window& window,
                      const Eigen::Ref<const Eigen::RowVectorXd>& values) {
  auto out = open_output(path);
  out << "t,value\n";
  for (Eigen::Index j = 0; j < window.columns; ++j) {
    out << csv_number(window.t0 + static_cast<double>(j) * window.dt) << ',' << csv_number(values(j)) << '\n';
  }
}

void write_plan_csv(const std::filesystem::path& path, const MrdmdPlan& plan) {
  auto out = open_output(path);
  out << "level,bins,bin_size,bin_duration_s,subsample_hz,max_capturable_hz,max_slow_hz\n";
  for (const auto& row : plan.per_level) {
    out << row.level << ',' << row.bins << ',' << csv_number(row.bin_size.to_double()) << ','
        << csv_number(row.bin_duration.to_double()) << ',' << csv_number(row.subsample_hz.to_double()) << ','
        << csv_number(row.max_capturable_hz.to_double()) << ',' << csv_number(row.max_slow_hz.to_double())
        << '\n';
  }
}

json plan_json(const MrdmdPlan& plan) {
  json levels = json::array();
  for (const auto& row : plan.per_level) {
    levels.push_back({{"level", row.level},
                      {"bins", row.bins},
                      {"bin_size", row.bin_size.str()},
                      {"bin_duration_s", row.bin_duration.str()},
                      {"subsample_hz", row.subsample_hz.str()},
                      {"max_capturable_hz", row.max_capturable_hz.str()},
                      {"max_slow_hz", row.max_slow_hz.str()}});
  }
  return json{{"mu", plan.mu},         {"termination_level", plan.levels},
              {"g", plan.g.str()},     {"rho", plan.rho},
              {"n", plan.n},           {"dt", plan.dt.str()},
              {"window_s", plan.window.str()}, {"levels", levels}};
}

json dmd_report(const Dataset& data, const DmdAnalysis& analysis, const RunConfig& config) {
  const auto* dominant = analysis.dominant();
  json report{{"tool", "oscid"},
              {"version", kToolVersion},
              {"method", "dmd"},
              {"status", analysis.result ? "ok" : "failed_to_identify"},
              {"input", input_json(data, analysis.channel)},
              {"snapshots", {{"rows", analysis.rows}, {"columns", analysis.window.columns}, {"stack_depth", analysis.stack_depth}}},
              {"truncation", {{"kind", rule_kind(config.rule)}, {"value", config.rule.value}}},
              {"critical_band", config.critical_band},
              {"mode_count", analysis.modes.size()},
              {"dominant_mode", optional_mode_json(dominant)},
              {"stability", stability_json(analysis.modes, dominant)},
              {"reconstruction", error_json(analysis.error)}};
  if (analysis.result) {
    report["truncation"]["rank"] = analysis.result->rank;
    report["truncation"]["rank_clamped"] = analysis.result->rank_clamped;
  } else {
    report["message"] = analysis.failure;
  }
  return report;
}

json mrdmd_report(const Dataset& data, const MrdmdAnalysis& analysis, const RunConfig& config) {
  const auto* dominant = analysis.dominant();
  const auto& result = analysis.result;
  json levels = json::array();
  for (std::size_t l = 0; l < result.per_level_reconstruction.size(); ++l) {
    const auto& rec = result.per_level_reconstruction[l];
    const double rms = rec.cols() > 0 ? std::sqrt(rec.row(0).squaredNorm() / static_cast<double>(rec.cols())) : 0.0;
    std::size_t slow = 0;
    for (const auto& m : result.modes) {
      if (m.level == static_cast<int>(l + 1) && m.slow) ++slow;
    }
    levels.push_back({{"level", l + 1}, {"reconstruction_rms", rms}, {"slow_modes", slow}});
  }
  const bool identified = std::any_of(result.modes.begin(), result.modes.end(),
                                      [](const ModeReport& m) { return m.slow; });
  return json{{"tool", "oscid"},
              {"version", kToolVersion},
              {"method", "mrdmd"},
              {"status", identified ? "ok" : "failed_to_identify"},
              {"input", input_json(data, analysis.channel)},
              {"snapshots", {{"rows", analysis.rows}, {"columns", analysis.window.columns}, {"stack_depth", analysis.stack_depth}}},
              {"truncation", {{"kind", rule_kind(config.rule)}, {"value", config.rule.value}}},
              {"critical_band", config.critical_band},
              {"plan", plan_json(result.plan)},
              {"levels", levels},
              {"mode_count", result.modes.size()},
              {"dominant_mode", optional_mode_json(dominant)},
              {"stability", stability_json(result.modes, dominant)},
              {"reconstruction", error_json(analysis.error)}};
}

const ModeReport* first_ranked(const std::vector<ModeReport>& modes) {
  const ModeReport* best = nullptr;
  for (const auto& m : modes) {
    if (m.dominant_rank == 1) best = &m;
  }
  // Only slow oscillatory modes qualify as the dominant oscillation.
  return best && best->slow && best->oscillatory ? best : nullptr;
}

std::filesystem::path group_dir(const RunConfig& config, std::size_t groups, const std::vector<std::string>& group) {
  if (groups <= 1) return config.output_dir;
  return config.output_dir / join(group);
}

template <typename Body>
int for_each_group(const RunConfig& config, Body&& body) {
  config.validate();
  const auto data = load_dataset(config);
  const auto groups = channel_groups(data.record, config);
  for (const auto& group : groups) {
    const auto dir = group_dir(config, groups.size(), group);
    std::filesystem::create_directories(dir);
    body(data, group, dir);
  }
  return 0;
}

json method_comparison(const ModeReport* dominant, const std::optional<ReconstructionError>& error,
                       const std::optional<ModeSpec>& truth, bool succeeded, const std::string& message) {
  json out{{"status", succeeded && dominant ? "ok" : "failed_to_identify"},
           {"dominant_mode", optional_mode_json(dominant)},
           {"reconstruction", error_json(error)}};
  if (dominant && truth) {
    out["frequency_error_hz"] = std::fabs(dominant->frequency_hz - truth->frequency_hz);
    out["growth_rate_error"] = std::fabs(dominant->growth_rate - truth->growth_rate);
  } else {
    out["frequency_error_hz"] = nullptr;
    out["growth_rate_error"] = nullptr;
  }
  if (!message.empty()) out["message"] = message;
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (input.has_value() == profile.has_value()) {
    throw Error(ErrorCode::invalid_argument, "exactly one of an input file or a generator profile is required");
  }
  rule.validate();
  if (stack_depth && *stack_depth < 1) throw Error(ErrorCode::invalid_argument, "stack depth must be positive");
  if (mu < 2) throw Error(ErrorCode::invalid_argument, "mu must be at least 2");
  if (!(g > Rational(1))) throw Error(ErrorCode::invalid_argument, "g must exceed 1");
  if (termination_level && *termination_level < 1) {
    throw Error(ErrorCode::invalid_argument, "termination level must be positive");
  }
  if (!(critical_band >= 0.0) || !std::isfinite(critical_band)) {
    throw Error(ErrorCode::invalid_argument, "critical band must be non-negative");
  }
  if (ingest.dt && !(*ingest.dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (noise_std && !(*noise_std >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise must be non-negative");
  if (threads < 1) throw Error(ErrorCode::invalid_argument, "threads must be at least 1");
}

Dataset load_dataset(const RunConfig& config) {
  std::optional<SignalRecord> record;
  Dataset data{SignalRecord({Channel{"x", {0.0, 0.0}, {}}}, 1.0), "", std::nullopt};
  if (config.profile) {
    auto generator = profile(*config.profile);
    if (config.seed) generator.seed = *config.seed;
    if (config.noise_std) generator.noise_std = *config.noise_std;
    data.record = generate(generator);
    data.generator = generator;
    data.source = "profile:" + *config.profile;
  } else {
    if (!std::filesystem::exists(*config.input)) {
      throw Error(ErrorCode::io, "input file '" + config.input->string() + "' does not exist");
    }
    data.record = load_csv(*config.input, config.ingest);
    data.source = config.input->string();
  }
  if (config.gap_length > 0) data.record = inject_gap(data.record, config.gap_start, config.gap_length);
  return data;
}

std::optional<ReconstructionError> reconstruction_error(const Window& window,
                                                        const Eigen::Ref<const Eigen::RowVectorXd>& estimate) {
  if (estimate.size() != window.columns) throw Error(ErrorCode::shape_mismatch, "estimate length differs from window");
  double squared_error = 0.0;
  double squared_signal = 0.0;
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < window.columns; ++j) {
    const auto i = static_cast<std::size_t>(j);
    if (window.missing[i]) continue;
    const double diff = estimate(j) - window.measured[i];
    squared_error += diff * diff;
    squared_signal += window.measured[i] * window.measured[i];
    ++count;
  }
  if (count == 0) return std::nullopt;
  return ReconstructionError{std::sqrt(squared_error / static_cast<double>(count)),
                             std::sqrt(squared_signal / static_cast<double>(count)), count};
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::stable: return "stable";
    case Verdict::sustained_oscillation: return "sustained_oscillation";
    case Verdict::unstable: return "unstable";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

Verdict verdict_for(const ModeReport* dominant) noexcept {
  if (!dominant) return Verdict::undetermined;
  switch (dominant->damping) {
    case DampingClass::decaying: return Verdict::stable;
    case DampingClass::critical: return Verdict::sustained_oscillation;
    case DampingClass::growing: return Verdict::unstable;
  }
  return Verdict::undetermined;
}

const ModeReport* DmdAnalysis::dominant() const { return first_ranked(modes); }
const ModeReport* MrdmdAnalysis::dominant() const { return first_ranked(result.modes); }

std::vector<std::vector<std::string>> channel_groups(const SignalRecord& record, const RunConfig& config) {
  if (config.joint) {
    std::vector<std::string> all;
    for (const auto& channel : record.channels()) all.push_back(channel.name);
    return {all};
  }
  if (config.channel) {
    record.channel(*config.channel);
    return {{*config.channel}};
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& channel : record.channels()) out.push_back({channel.name});
  return out;
}

DmdAnalysis analyze_dmd(const SignalRecord& record, std::span<const std::string> channels,
                        const RunConfig& config) {
  DmdAnalysis analysis;
  analysis.stack_depth = resolve_depth(record, config);
  analysis.channel = join(channels);
  const auto snapshots = delay_embed_joint(record, channels, analysis.stack_depth);
  const auto pair = shifted_pair(snapshots);
  const Eigen::Index n = pair.first.cols();
  analysis.rows = pair.first.rows();
  analysis.window = make_window(record, channels.front(), n);
  analysis.reconstruction = Eigen::RowVectorXd::Zero(n);

  try {
    analysis.result = dmd(pair.first, pair.second, config.rule, record.dt());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_signal && e.code() != ErrorCode::defective_operator) throw;
    analysis.failure = e.what();
  }
  if (analysis.result) {
    const auto& result = *analysis.result;
    std::vector<Eigen::Index> all(static_cast<std::size_t>(result.rank));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    analysis.modes = describe_modes(result, 1, 0, 1.0 / record.dt(), static_cast<std::size_t>(n), all);
    const bool reliable = std::none_of(snapshots.masked_columns.begin(), snapshots.masked_columns.begin() + n,
                                       [](bool masked) { return masked; });
    for (auto& mode : analysis.modes) mode.reliable = reliable;
    classify(analysis.modes, config.critical_band);
    // First row only: sum_k Phi_k(0) lambda_k^j b_k.
    for (Eigen::Index k = 0; k < result.rank; ++k) {
      Complex value = result.modes(0, k) * result.amplitudes(k);
      for (Eigen::Index j = 0; j < n; ++j) {
        analysis.reconstruction(j) += value.real();
        value *= result.eigenvalues(k);
      }
    }
  }
  analysis.error = reconstruction_error(analysis.window, analysis.reconstruction);
  return analysis;
}

MrdmdAnalysis analyze_mrdmd(const SignalRecord& record, std::span<const std::string> channels,
                            const RunConfig& config) {
  MrdmdAnalysis analysis;
  analysis.stack_depth = resolve_depth(record, config);
  analysis.channel = join(channels);
  const auto snapshots = delay_embed_joint(record, channels, analysis.stack_depth);
  const Eigen::Index n = snapshots.cols() - 1;
  if (n < 2) throw Error(ErrorCode::invalid_argument, "too few snapshot columns for MR-DMD");
  analysis.rows = snapshots.rows();
  analysis.window = make_window(record, channels.front(), n);

  const auto levels = plan(n, record.dt(), config.mu, config.g, config.termination_level);
  DecomposeOptions options;
  options.rule = config.rule;
  options.retained_rows = 1;
  options.critical_band = config.critical_band;
  options.threads = config.threads;
  if (config.dealias && analysis.stack_depth > 1) options.delay_stride = static_cast<Eigen::Index>(channels.size());
  options.masked_columns.assign(snapshots.masked_columns.begin(), snapshots.masked_columns.begin() + n);
  analysis.result = decompose(snapshots.data.leftCols(n), record.dt(), levels, options);
  analysis.error = reconstruction_error(analysis.window, analysis.result.total_reconstruction.row(0));
  return analysis;
}

int run_dmd(const RunConfig& config) {
  return for_each_group(config, [&](const Dataset& data, const std::vector<std::string>& group,
                                    const std::filesystem::path& dir) {
    const auto analysis = analyze_dmd(data.record, group, config);
    if (config.emit.eigenvalues) write_modes_csv(dir / "eigenvalues.csv", analysis.modes, false);
    write_reconstruction_csv(dir / "reconstruction.csv", analysis.window, analysis.reconstruction);
    if (config.emit.report) write_json(dir / "report.json", dmd_report(data, analysis, config));
  });
}

int run_mrdmd(const RunConfig& config) {
  return for_each_group(config, [&](const Dataset& data, const std::vector<std::string>& group,
                                    const std::filesystem::path& dir) {
    const auto analysis = analyze_mrdmd(data.record, group, config);
    const auto& result = analysis.result;
    if (config.emit.plan) write_plan_csv(dir / "plan.csv", result.plan);
    if (config.emit.levels) {
      for (std::size_t l = 0; l < result.per_level_reconstruction.size(); ++l) {
        write_series_csv(dir / ("level_" + std::to_string(l + 1) + ".csv"), analysis.window,
                         result.per_level_reconstruction[l].row(0));
      }
    }
    if (config.emit.eigenvalues) write_modes_csv(dir / "modes.csv", result.modes, true);
    write_reconstruction_csv(dir / "reconstruction.csv", analysis.window, result.total_reconstruction.row(0));
    if (config.emit.report) write_json(dir / "report.json", mrdmd_report(data, analysis, config));
  });
}

int run_compare(const RunConfig& config) {
  return for_each_group(config, [&](const Dataset& data, const std::vector<std::string>& group,
                                    const std::filesystem::path& dir) {
    std::optional<ModeSpec> truth;
    if (data.generator && !data.generator->modes.empty()) truth = dominant_mode(*data.generator);
    const auto by_dmd = analyze_dmd(data.record, group, config);
    const auto by_mrdmd = analyze_mrdmd(data.record, group, config);
    json out{{"tool", "oscid"},
             {"version", kToolVersion},
             {"input", input_json(data, by_dmd.channel)},
             {"gap", {{"start", config.gap_start}, {"length", config.gap_length}}},
             {"ground_truth", truth ? json{{"frequency_hz", truth->frequency_hz},
                                           {"growth_rate", truth->growth_rate}}
                                    : json(nullptr)},
             {"dmd", method_comparison(by_dmd.dominant(), by_dmd.error, truth, by_dmd.result.has_value(),
                                       by_dmd.failure)},
             {"mrdmd", method_comparison(by_mrdmd.dominant(), by_mrdmd.error, truth, true, "")}};
    write_json(dir / "compare.json", out);
  });
}

int run_generate(const RunConfig& config, const std::filesystem::path& output) {
  if (!config.profile) throw Error(ErrorCode::invalid_argument, "generate needs a profile");
  auto data = load_dataset(config);
  if (output.has_parent_path()) std::filesystem::create_directories(output.parent_path());
  save_csv(output, data.record);
  return 0;
}

int run_plan(const RunConfig& config, std::optional<std::int64_t> n, std::optional<double> dt) {
  MrdmdPlan levels;
  if (n && dt) {
    levels = plan(*n, *dt, config.mu, config.g, config.termination_level);
  } else {
    config.validate();
    const auto data = load_dataset(config);
    const auto depth = resolve_depth(data.record, config);
    const auto columns = static_cast<std::int64_t>(data.record.length() - std::min(depth, data.record.length()));
    levels = plan(n.value_or(columns), dt.value_or(data.record.dt()), config.mu, config.g,
                  config.termination_level);
  }
  std::filesystem::create_directories(config.output_dir);
  if (config.emit.plan) write_plan_csv(config.output_dir / "plan.csv", levels);
  std::cout << "n=" << levels.n << " dt=" << levels.dt << " N=" << levels.window << " mu=" << levels.mu
            << " g=" << levels.g << " rho=" << levels.rho << " L=" << levels.levels << '\n';
  std::cout << "level bins S D f_sp f_m f_slow\n";
  for (const auto& row : levels.per_level) {
    std::cout << row.level << ' ' << row.bins << ' ' << row.bin_size << ' ' << row.bin_duration << ' '
              << row.subsample_hz << ' ' << row.max_capturable_hz << ' ' << row.max_slow_hz << '\n';
  }
  return 0;
}

std::string csv_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.16e", value);
  return buffer;
}

}  // namespace oscid
