#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "oscid/ingest.hpp"

namespace oscid {

struct ModeSpec {
  double frequency_hz = 0.0;
  double growth_rate = 0.0;  // sigma, 1/s
  double amplitude = 0.0;
  double phase = 0.0;        // radians
};

struct GeneratorConfig {
  std::vector<ModeSpec> modes;
  double dc = 0.0;
  double sample_rate_hz = 2500.0;
  double duration_s = 2.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::string channel = "x";
};

// x(t) = dc + sum a_i exp(sigma_i t) cos(2 pi f_i t + phi_i) + N(0, noise_std^2)
// at t = i / fs for i in [0, round(duration * fs)).
SignalRecord generate(const GeneratorConfig& config);

std::vector<std::string> profile_names();
// `lfo_udc` (DC-link voltage with an 8.6 Hz oscillation) or `ac_in` (50 Hz
// line current with 41.4 / 58.6 Hz sidebands).
GeneratorConfig profile(std::string_view name);

// The mode with the largest amplitude.
ModeSpec dominant_mode(const GeneratorConfig& config);

}  // namespace oscid
