#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oscid/dmd.hpp"
#include "oscid/modes.hpp"
#include "oscid/rational.hpp"

namespace oscid {

struct LevelPlan {
  int level = 1;
  std::int64_t bins = 1;          // B = 2^(l-1)
  Rational bin_size;              // S = n / B (nominal, in snapshot columns)
  Rational bin_duration;          // D = S * dt
  Rational subsample_hz;          // f_sp = mu / D
  Rational max_capturable_hz;     // f_m = 2^(l-2) * mu / N
  Rational max_slow_hz;           // f_m / g
  std::int64_t min_bin_columns = 0;  // floor(n / B)
};

struct MrdmdPlan {
  int mu = 0;
  int levels = 0;                 // L
  Rational g;
  double rho = 0.0;               // pi / g
  std::int64_t n = 0;
  Rational dt;
  Rational window;                // N = n * dt
  std::vector<LevelPlan> per_level;
};

// Largest L with floor(n / 2^(L-1)) > mu unless `levels_override` is given,
// in which case the override must satisfy the same bound.
MrdmdPlan plan(std::int64_t n, double dt, int mu, Rational g,
               std::optional<int> levels_override = std::nullopt);

struct ColumnSpan {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive

  Eigen::Index length() const noexcept { return end - begin; }
  bool operator==(const ColumnSpan&) const = default;
};

// mu strictly increasing columns begin + round(i * length / mu).
std::vector<Eigen::Index> subsample(ColumnSpan span, int mu);

// {k : |ln lambda_k| < rho}; lambda_k == 0 never qualifies.
std::vector<Eigen::Index> screen_slow(const DmdResult& result, double rho);

// Same test on precomputed logarithms (see branch_logs).
std::vector<Eigen::Index> screen_slow(std::span<const Complex> logs, double rho);

// ln(lambda_k), with the imaginary part moved by a multiple of 2 pi when the
// mode's delay structure says the subsampled eigenvalue is an alias. A
// delay-embedded mode shape advances by a per-sample factor z from one delay
// block (delay_stride rows) to the next; the branch whose Im is closest to
// arg(z) * samples_per_step is kept. Shapes that are not shift-consistent,
// zero eigenvalues (log -inf) and delay_stride == 0 keep the principal branch.
// A corrected log can only fail the slow test it would otherwise pass: any
// branch with |Im| < rho < pi is the principal one.
std::vector<Complex> branch_logs(const DmdResult& result, Eigen::Index delay_stride,
                                 double samples_per_step);

// Re sum_{k in slow_set} Phi_k exp(omega_k tau_j) b_k for every column of the
// span at full resolution, with omega_k = subsample_hz * ln lambda_k and
// tau_j = j * dt. Rows beyond `rows` (when given) are not evaluated.
Eigen::MatrixXd slow_reconstruction(const DmdResult& result,
                                    std::span<const Eigen::Index> slow_set, ColumnSpan span,
                                    double dt, double subsample_hz,
                                    std::optional<Eigen::Index> rows = std::nullopt);

struct MrdmdNode {
  int level = 1;
  std::size_t bin = 0;
  ColumnSpan span;
  std::vector<Eigen::Index> subsample_columns;
  double subsample_hz = 0.0;
  std::optional<DmdResult> dmd;  // empty when the bin carried no energy
  std::vector<Complex> logs;  // ln lambda_k as used for screening
  std::vector<Eigen::Index> slow_set;
  Eigen::MatrixXd slow_reconstruction;  // retained rows x span length
  std::vector<MrdmdNode> children;
  bool touches_missing = false;  // some span column is masked

  bool is_leaf() const noexcept { return children.empty(); }
};

struct DecomposeOptions {
  TruncationRule rule;
  // Keep only the leading rows of the stored reconstructions. The recursion
  // itself always works on the full matrix.
  std::optional<Eigen::Index> retained_rows;
  double critical_band = kDefaultCriticalBand;
  // Sibling bins are processed concurrently when > 1. Results do not depend
  // on this value.
  unsigned threads = 1;
  // Per snapshot column, whether it holds missing samples (see
  // SnapshotMatrix::masked_columns). Modes from bins touching a masked
  // column are reported as unreliable. Empty means fully observed.
  std::vector<bool> masked_columns;
  // Rows between consecutive delays of one channel (the channel count of a
  // delay embedding). Non-zero enables alias correction via branch_logs;
  // zero screens on the principal branch.
  Eigen::Index delay_stride = 0;
};

struct MrdmdResult {
  MrdmdPlan plan;
  MrdmdNode root;
  std::vector<Eigen::MatrixXd> per_level_reconstruction;  // index l - 1
  Eigen::MatrixXd total_reconstruction;
  std::vector<ModeReport> modes;  // classified, tagged (level, bin)
};

MrdmdResult decompose(const Eigen::MatrixXd& snapshots, double dt, const MrdmdPlan& plan,
                      const DecomposeOptions& options = {});

// Calls `visit(node)` depth first, parents before children.
template <typename Visitor>
void for_each_node(const MrdmdNode& node, Visitor&& visit) {
  visit(node);
  for (const auto& child : node.children) for_each_node(child, visit);
}

}  // namespace oscid
