#include "oscid/siggen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oscid/error.hpp"

namespace oscid {

SignalRecord generate(const GeneratorConfig& config) {
  if (!(config.sample_rate_hz > 0.0)) throw Error(ErrorCode::invalid_argument, "sample rate must be positive");
  if (!(config.noise_std >= 0.0)) throw Error(ErrorCode::invalid_argument, "noise std must be non-negative");
  for (const auto& mode : config.modes) {
    if (!std::isfinite(mode.amplitude) || !std::isfinite(mode.growth_rate) || !std::isfinite(mode.phase)) {
      throw Error(ErrorCode::invalid_argument, "mode parameters must be finite");
    }
    if (!(mode.frequency_hz >= 0.0) || !(config.sample_rate_hz > 2.0 * mode.frequency_hz)) {
      throw Error(ErrorCode::invalid_argument, "mode at " + std::to_string(mode.frequency_hz) +
                                                   " Hz aliases at " +
                                                   std::to_string(config.sample_rate_hz) + " Hz sampling");
    }
  }
  const double count_real = config.duration_s * config.sample_rate_hz;
  if (!(count_real >= 2.0) || !std::isfinite(count_real)) {
    throw Error(ErrorCode::invalid_argument, "duration * sample rate must be at least 2");
  }
  const auto count = static_cast<std::size_t>(std::llround(count_real));

  std::mt19937_64 engine(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double dt = 1.0 / config.sample_rate_hz;

  Channel channel;
  channel.name = config.channel;
  channel.values.resize(count);
  channel.missing.assign(count, false);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * dt;
    double value = config.dc;
    for (const auto& mode : config.modes) {
      value += mode.amplitude * std::exp(mode.growth_rate * t) *
               std::cos(2.0 * std::numbers::pi * mode.frequency_hz * t + mode.phase);
    }
    if (config.noise_std > 0.0) value += config.noise_std * noise(engine);
    channel.values[i] = value;
  }
  std::vector<Channel> channels;
  channels.push_back(std::move(channel));
  return SignalRecord(std::move(channels), dt, 0.0, FillPolicy::zero);
}

std::vector<std::string> profile_names() { return {"lfo_udc", "ac_in"}; }

GeneratorConfig profile(std::string_view name) {
  GeneratorConfig config;
  config.sample_rate_hz = 2500.0;
  config.duration_s = 2.0;
  config.seed = 1;
  if (name == "lfo_udc") {
    config.channel = "udc";
    config.dc = 170.0;
    config.modes = {{8.6, 0.0, 6.0, 0.0}};
    config.noise_std = 0.05;
    return config;
  }
  if (name == "ac_in") {
    config.channel = "in";
    config.dc = 0.0;
    config.modes = {{50.0, 0.0, 10.0, 0.0}, {41.4, 0.0, 2.0, 0.3}, {58.6, 0.0, 2.0, -0.3}};
    config.noise_std = 0.01;
    return config;
  }
  throw Error(ErrorCode::invalid_argument, "unknown generator profile '" + std::string(name) + "'");
}

ModeSpec dominant_mode(const GeneratorConfig& config) {
  if (config.modes.empty()) throw Error(ErrorCode::invalid_argument, "generator has no modes");
  return *std::max_element(config.modes.begin(), config.modes.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.amplitude) < std::fabs(b.amplitude);
  });
}

}  // namespace oscid
