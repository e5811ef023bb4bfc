#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oscid/dmd.hpp"

namespace oscid {

enum class DampingClass { decaying, critical, growing };

std::string_view to_string(DampingClass value) noexcept;

// Growth rates with |Re omega| <= this are reported as critical (1/s).
inline constexpr double kDefaultCriticalBand = 0.5;

struct ModeReport {
  int level = 1;
  std::size_t bin = 0;
  Eigen::Index mode_index = 0;   // column in the node's DmdResult
  Complex lambda;                // discrete, at the node's sample interval
  Complex omega;                 // continuous, rad/s
  double frequency_hz = 0.0;
  double growth_rate = 0.0;
  DampingClass damping = DampingClass::critical;
  double amplitude = 0.0;        // |b_k|
  double integral_contribution = 0.0;
  std::size_t dominant_rank = 0; // 1-based after classify()
  bool pair = false;             // stands for a conjugate pair
  bool slow = false;
  bool oscillatory = false;      // frequency above the node's resolution floor
  bool reliable = true;          // identified from snapshots free of missing samples
};

// omega = sample_rate * ln(lambda), principal branch. Rejects lambda == 0.
Complex to_continuous(Complex lambda, double sample_rate_hz);

// ||Phi_k|| * sum_{j=1..horizon} |b_k| |lambda_k|^(j-1).
double integral_contribution(const Eigen::Ref<const Eigen::VectorXcd>& mode, Complex lambda,
                             Complex amplitude, std::size_t horizon_steps);

// One row per real mode or conjugate pair (represented by its member with
// Im lambda > 0). Modes with lambda == 0 are dropped. `slow` marks indices
// that are in slow_set.
std::vector<ModeReport> describe_modes(const DmdResult& result, int level, std::size_t bin,
                                       double sample_rate_hz, std::size_t horizon_steps,
                                       std::span<const Eigen::Index> slow_set = {});

DampingClass damping_class(double growth_rate, double critical_band) noexcept;

// Sets damping classes and dominant ranks (1 = dominant). Candidates are
// ordered in tiers:
//   1. slow, oscillatory and reliable: critical before growing before
//      decaying, each by descending integral contribution;
//   2. slow and oscillatory but unreliable, by integral contribution;
//   3. everything else, by integral contribution.
// Remaining ties go to lower frequency, then lower level.
void classify(std::span<ModeReport> reports, double critical_band = kDefaultCriticalBand);

}  // namespace oscid
