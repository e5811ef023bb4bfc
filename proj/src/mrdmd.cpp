#include "oscid/mrdmd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "oscid/error.hpp"

namespace oscid {
namespace {

Rational power_of_two(int exponent) {
  if (exponent >= 0) return Rational(std::int64_t{1} << exponent);
  return Rational(1, std::int64_t{1} << -exponent);
}

std::int64_t min_bin_columns(std::int64_t n, int level) { return n >> (level - 1); }

// A mode shape counts as shift-consistent when advancing it by one delay
// leaves at most this relative residual.
constexpr double kShiftTolerance = 0.1;

// Bins whose sampled residual falls below this fraction of the input norm are
// treated as fully explained.
constexpr double kResidualFloor = 1e-13;

struct Recursion {
  const MrdmdPlan& plan;
  const DecomposeOptions& options;
  double dt;
  double energy_floor;
  Eigen::Index kept_rows;
  Eigen::MatrixXd& residual;
  std::vector<Eigen::MatrixXd>& per_level;

  TruncationRule bin_rule() const {
    TruncationRule rule = options.rule;
    if (rule.kind == TruncationRule::Kind::fixed_rank) {
      rule.value = std::min(rule.value, static_cast<double>(plan.mu - 1));
    }
    return rule;
  }

  void run(MrdmdNode& node, int level, std::size_t bin, ColumnSpan span) {
    node.level = level;
    node.bin = bin;
    node.span = span;
    node.subsample_columns = subsample(span, plan.mu);
    node.subsample_hz = plan.mu / (static_cast<double>(span.length()) * dt);
    const auto& mask = options.masked_columns;
    if (!mask.empty()) {
      node.touches_missing = std::any_of(mask.begin() + span.begin, mask.begin() + span.end,
                                         [](bool masked) { return masked; });
    }

    Eigen::MatrixXd sampled(residual.rows(), plan.mu);
    for (int i = 0; i < plan.mu; ++i) sampled.col(i) = residual.col(node.subsample_columns[static_cast<std::size_t>(i)]);

    if (sampled.norm() > energy_floor) {
      try {
        node.dmd = dmd(sampled.leftCols(plan.mu - 1), sampled.rightCols(plan.mu - 1), bin_rule(),
                       1.0 / node.subsample_hz);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::no_signal && e.code() != ErrorCode::defective_operator) throw;
        node.dmd.reset();
      }
    }

    if (node.dmd) {
      node.logs = branch_logs(*node.dmd, options.delay_stride,
                              static_cast<double>(span.length()) / plan.mu);
      node.slow_set = screen_slow(node.logs, plan.rho);
      const Eigen::MatrixXd slow =
          oscid::slow_reconstruction(*node.dmd, node.slow_set, span, dt, node.subsample_hz);
      residual.middleCols(span.begin, span.length()) -= slow;
      node.slow_reconstruction = slow.topRows(kept_rows);
    } else {
      node.slow_reconstruction = Eigen::MatrixXd::Zero(kept_rows, span.length());
    }
    per_level[static_cast<std::size_t>(level - 1)].middleCols(span.begin, span.length()) =
        node.slow_reconstruction;

    if (level >= plan.levels) return;
    const Eigen::Index mid = span.begin + (span.length() + 1) / 2;
    node.children.resize(2);
    const ColumnSpan left{span.begin, mid};
    const ColumnSpan right{mid, span.end};
    const bool parallel = options.threads > 1 && (std::size_t{1} << level) <= 2 * options.threads;
    if (parallel) {
      auto pending = std::async(std::launch::async,
                                [&] { run(node.children[0], level + 1, 2 * bin, left); });
      run(node.children[1], level + 1, 2 * bin + 1, right);
      pending.get();
    } else {
      run(node.children[0], level + 1, 2 * bin, left);
      run(node.children[1], level + 1, 2 * bin + 1, right);
    }
  }
};

}  // namespace

MrdmdPlan plan(std::int64_t n, double dt, int mu, Rational g, std::optional<int> levels_override) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 snapshot columns");
  if (mu < 2) throw Error(ErrorCode::invalid_argument, "subsample count must be at least 2");
  if (!(g > Rational(1))) throw Error(ErrorCode::invalid_argument, "screening divisor g must exceed 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (mu >= n) {
    throw Error(ErrorCode::infeasible_plan,
                "cannot subsample level 1: n / 2^(L-1) > mu fails with n = " + std::to_string(n) +
                    ", mu = " + std::to_string(mu));
  }
  int levels = 1;
  while (levels < 62 && min_bin_columns(n, levels + 1) > mu) ++levels;
  if (levels_override) {
    const int wanted = *levels_override;
    if (wanted < 1 || wanted > 62 || min_bin_columns(n, wanted) <= mu) {
      throw Error(ErrorCode::infeasible_plan,
                  "termination level " + std::to_string(wanted) + " violates n / 2^(L-1) > mu (max " +
                      std::to_string(levels) + ")");
    }
    levels = wanted;
  }

  MrdmdPlan out;
  out.mu = mu;
  out.levels = levels;
  out.g = g;
  out.rho = std::numbers::pi / g.to_double();
  out.n = n;
  out.dt = Rational::from_double(dt);
  out.window = Rational(n) * out.dt;
  for (int l = 1; l <= levels; ++l) {
    LevelPlan row;
    row.level = l;
    row.bins = std::int64_t{1} << (l - 1);
    row.bin_size = Rational(n, row.bins);
    row.bin_duration = row.bin_size * out.dt;
    row.subsample_hz = Rational(mu) / row.bin_duration;
    row.max_capturable_hz = power_of_two(l - 2) * Rational(mu) / out.window;
    row.max_slow_hz = row.max_capturable_hz / g;
    row.min_bin_columns = min_bin_columns(n, l);
    out.per_level.push_back(row);
  }
  return out;
}

std::vector<Eigen::Index> subsample(ColumnSpan span, int mu) {
  const Eigen::Index length = span.length();
  if (mu < 1 || length < mu) {
    throw Error(ErrorCode::invalid_argument, "span of " + std::to_string(length) +
                                                 " columns is shorter than the subsample count " +
                                                 std::to_string(mu));
  }
  std::vector<Eigen::Index> out(static_cast<std::size_t>(mu));
  for (Eigen::Index i = 0; i < mu; ++i) {
    // round(i * length / mu), halves rounded up
    out[static_cast<std::size_t>(i)] = span.begin + (2 * i * length + mu) / (2 * mu);
  }
  return out;
}

std::vector<Eigen::Index> screen_slow(const DmdResult& result, double rho) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < result.eigenvalues.size(); ++k) {
    const Complex lambda = result.eigenvalues(k);
    if (lambda == Complex(0.0, 0.0)) continue;
    if (std::abs(std::log(lambda)) < rho) out.push_back(k);
  }
  return out;
}

std::vector<Eigen::Index> screen_slow(std::span<const Complex> logs, double rho) {
  std::vector<Eigen::Index> out;
  for (std::size_t k = 0; k < logs.size(); ++k) {
    if (std::abs(logs[k]) < rho) out.push_back(static_cast<Eigen::Index>(k));
  }
  return out;
}

std::vector<Complex> branch_logs(const DmdResult& result, Eigen::Index delay_stride,
                                 double samples_per_step) {
  const Eigen::Index m = result.modes.rows();
  std::vector<Complex> out(static_cast<std::size_t>(result.eigenvalues.size()));
  for (Eigen::Index k = 0; k < result.eigenvalues.size(); ++k) {
    const Complex lambda = result.eigenvalues(k);
    Complex log = lambda == Complex(0.0, 0.0)
                      ? Complex(-std::numeric_limits<double>::infinity(), 0.0)
                      : std::log(lambda);
    if (delay_stride > 0 && m > delay_stride && std::isfinite(log.real())) {
      const auto shape = result.modes.col(k);
      const auto head = shape.head(m - delay_stride);
      const auto tail = shape.tail(m - delay_stride);
      const double head_norm = head.squaredNorm();
      if (head_norm > 0.0) {
        const Complex z = head.dot(tail) / head_norm;  // least-squares tail ~ z * head
        const double misfit = (tail - z * head).norm();
        if (z != Complex(0.0, 0.0) && misfit <= kShiftTolerance * tail.norm()) {
          const double target = std::arg(z) * samples_per_step;
          const double turns = std::round((target - log.imag()) / (2.0 * std::numbers::pi));
          log += Complex(0.0, 2.0 * std::numbers::pi * turns);
        }
      }
    }
    out[static_cast<std::size_t>(k)] = log;
  }
  return out;
}

Eigen::MatrixXd slow_reconstruction(const DmdResult& result,
                                    std::span<const Eigen::Index> slow_set, ColumnSpan span,
                                    double dt, double subsample_hz,
                                    std::optional<Eigen::Index> rows) {
  const Eigen::Index m = rows ? std::min(*rows, result.modes.rows()) : result.modes.rows();
  const Eigen::Index length = span.length();
  if (slow_set.empty()) return Eigen::MatrixXd::Zero(m, length);

  const auto count = static_cast<Eigen::Index>(slow_set.size());
  Eigen::MatrixXcd shapes(m, count);
  Eigen::MatrixXcd dynamics(count, length);
  for (Eigen::Index s = 0; s < count; ++s) {
    const Eigen::Index k = slow_set[static_cast<std::size_t>(s)];
    if (k < 0 || k >= result.rank) throw Error(ErrorCode::invalid_argument, "slow mode index out of range");
    shapes.col(s) = result.modes.col(k).head(m);
    const Complex omega = subsample_hz * std::log(result.eigenvalues(k));
    const Complex b = result.amplitudes(k);
    for (Eigen::Index j = 0; j < length; ++j) {
      dynamics(s, j) = std::exp(omega * (static_cast<double>(j) * dt)) * b;
    }
  }
  return (shapes * dynamics).real();
}

MrdmdResult decompose(const Eigen::MatrixXd& snapshots, double dt, const MrdmdPlan& plan,
                      const DecomposeOptions& options) {
  if (snapshots.cols() != plan.n) {
    throw Error(ErrorCode::shape_mismatch, "snapshot matrix has " + std::to_string(snapshots.cols()) +
                                               " columns, plan expects " + std::to_string(plan.n));
  }
  if (snapshots.rows() < 1) throw Error(ErrorCode::shape_mismatch, "snapshot matrix has no rows");
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");
  if (!options.masked_columns.empty() &&
      options.masked_columns.size() != static_cast<std::size_t>(plan.n)) {
    throw Error(ErrorCode::shape_mismatch, "column mask length differs from the plan's n");
  }
  options.rule.validate();

  MrdmdResult out;
  out.plan = plan;
  const Eigen::Index kept_rows =
      options.retained_rows ? std::clamp<Eigen::Index>(*options.retained_rows, 1, snapshots.rows())
                            : snapshots.rows();
  out.per_level_reconstruction.assign(static_cast<std::size_t>(plan.levels),
                                      Eigen::MatrixXd::Zero(kept_rows, plan.n));
  Eigen::MatrixXd residual = snapshots;
  Recursion recursion{plan, options, dt, kResidualFloor * snapshots.norm(), kept_rows, residual,
                      out.per_level_reconstruction};
  recursion.run(out.root, 1, 0, ColumnSpan{0, plan.n});

  out.total_reconstruction = Eigen::MatrixXd::Zero(kept_rows, plan.n);
  for (const auto& level : out.per_level_reconstruction) out.total_reconstruction += level;

  for_each_node(out.root, [&](const MrdmdNode& node) {
    if (!node.dmd) return;
    auto reports = describe_modes(*node.dmd, node.level, node.bin, node.subsample_hz,
                                  static_cast<std::size_t>(plan.mu), node.slow_set);
    for (auto& report : reports) report.reliable = !node.touches_missing;
    out.modes.insert(out.modes.end(), reports.begin(), reports.end());
  });
  classify(out.modes, options.critical_band);
  return out;
}

}  // namespace oscid
