#include "oscid/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oscid/error.hpp"

namespace oscid {

std::string_view to_string(DampingClass value) noexcept {
  switch (value) {
    case DampingClass::decaying: return "decaying";
    case DampingClass::critical: return "critical";
    case DampingClass::growing: return "growing";
  }
  return "unknown";
}

Complex to_continuous(Complex lambda, double sample_rate_hz) {
  if (lambda == Complex(0.0, 0.0)) {
    throw Error(ErrorCode::invalid_argument, "eigenvalue 0 has no continuous-time counterpart");
  }
  return sample_rate_hz * std::log(lambda);
}

double integral_contribution(const Eigen::Ref<const Eigen::VectorXcd>& mode, Complex lambda,
                             Complex amplitude, std::size_t horizon_steps) {
  const double magnitude = std::abs(lambda);
  double envelope = 0.0;
  double power = 1.0;
  for (std::size_t j = 0; j < horizon_steps; ++j) {
    envelope += power;
    power *= magnitude;
  }
  return mode.norm() * std::abs(amplitude) * envelope;
}

DampingClass damping_class(double growth_rate, double critical_band) noexcept {
  if (std::fabs(growth_rate) <= critical_band) return DampingClass::critical;
  return growth_rate > 0.0 ? DampingClass::growing : DampingClass::decaying;
}

std::vector<ModeReport> describe_modes(const DmdResult& result, int level, std::size_t bin,
                                       double sample_rate_hz, std::size_t horizon_steps,
                                       std::span<const Eigen::Index> slow_set) {
  const auto& lambdas = result.eigenvalues;
  const auto partner_of = [&](Eigen::Index k) -> Eigen::Index {
    const Complex target = std::conj(lambdas(k));
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
      if (j != k && std::abs(lambdas(j) - target) <= 1e-12 * std::max(1.0, std::abs(target))) return j;
    }
    return -1;
  };
  // Half a cycle per analysis window is the least that counts as oscillation.
  const double window_s = static_cast<double>(horizon_steps) / sample_rate_hz;
  const double frequency_floor = 0.5 / window_s;

  std::vector<ModeReport> out;
  for (Eigen::Index k = 0; k < lambdas.size(); ++k) {
    const Complex lambda = lambdas(k);
    if (lambda == Complex(0.0, 0.0)) continue;
    bool pair = false;
    if (lambda.imag() != 0.0) {
      const auto partner = partner_of(k);
      if (partner >= 0) {
        if (lambda.imag() < 0.0) continue;
        pair = true;
      }
    }
    ModeReport report;
    report.level = level;
    report.bin = bin;
    report.mode_index = k;
    report.lambda = lambda;
    report.omega = to_continuous(lambda, sample_rate_hz);
    report.frequency_hz = std::fabs(report.omega.imag()) / (2.0 * std::numbers::pi);
    report.growth_rate = report.omega.real();
    report.amplitude = std::abs(result.amplitudes(k));
    report.integral_contribution =
        integral_contribution(result.modes.col(k), lambda, result.amplitudes(k), horizon_steps);
    report.pair = pair;
    report.slow = std::find(slow_set.begin(), slow_set.end(), k) != slow_set.end();
    report.oscillatory = report.frequency_hz >= frequency_floor;
    out.push_back(report);
  }
  return out;
}

void classify(std::span<ModeReport> reports, double critical_band) {
  for (auto& report : reports) report.damping = damping_class(report.growth_rate, critical_band);
  std::vector<std::size_t> order(reports.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto tier = [](const ModeReport& r) {
    if (!(r.slow && r.oscillatory)) return 5;
    if (!r.reliable) return 4;
    switch (r.damping) {
      case DampingClass::critical: return 0;
      case DampingClass::growing: return 1;
      case DampingClass::decaying: return 2;
    }
    return 3;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ra = reports[a];
    const auto& rb = reports[b];
    if (tier(ra) != tier(rb)) return tier(ra) < tier(rb);
    if (ra.integral_contribution != rb.integral_contribution) {
      return ra.integral_contribution > rb.integral_contribution;
    }
    if (ra.frequency_hz != rb.frequency_hz) return ra.frequency_hz < rb.frequency_hz;
    return ra.level < rb.level;
  });
  for (std::size_t rank = 0; rank < order.size(); ++rank) reports[order[rank]].dominant_rank = rank + 1;
}

}  // namespace oscid
