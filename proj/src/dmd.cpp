#include "oscid/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oscid/error.hpp"

namespace oscid {
namespace {

void require_shape(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::shape_mismatch, what);
}

// Largest (estimated) condition number of W before the operator is treated
// as defective.
constexpr double kEigenvectorConditionLimit = 1e10;

}  // namespace

TruncationRule TruncationRule::fixed_rank(Eigen::Index rank) {
  TruncationRule rule{Kind::fixed_rank, static_cast<double>(rank)};
  rule.validate();
  return rule;
}

TruncationRule TruncationRule::energy_fraction(double fraction) {
  TruncationRule rule{Kind::energy_fraction, fraction};
  rule.validate();
  return rule;
}

TruncationRule TruncationRule::singular_value_ratio(double ratio) {
  TruncationRule rule{Kind::singular_value_ratio, ratio};
  rule.validate();
  return rule;
}

void TruncationRule::validate() const {
  switch (kind) {
    case Kind::fixed_rank:
      if (!(value >= 1.0) || value != std::floor(value)) {
        throw Error(ErrorCode::invalid_argument, "fixed rank must be a positive integer");
      }
      break;
    case Kind::energy_fraction:
      if (!(value > 0.0 && value <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "energy fraction must lie in (0, 1]");
      }
      break;
    case Kind::singular_value_ratio:
      if (!(value > 0.0 && value < 1.0)) {
        throw Error(ErrorCode::invalid_argument, "singular value ratio must lie in (0, 1)");
      }
      break;
  }
}

TruncatedSvd svd_truncated(const Eigen::MatrixXd& x, const TruncationRule& rule) {
  rule.validate();
  if (x.size() == 0) throw Error(ErrorCode::shape_mismatch, "empty snapshot matrix");
  if (!x.allFinite()) throw Error(ErrorCode::invalid_argument, "snapshot matrix has non-finite entries");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 1e-300)) throw Error(ErrorCode::no_signal, "no signal energy");

  const double floor = std::max(1e-300, s(0) * kSingularValueFloor);
  Eigen::Index available = 0;
  while (available < s.size() && s(available) > floor) ++available;

  const double total = s.squaredNorm();
  Eigen::Index rank = 1;
  bool clamped = false;
  switch (rule.kind) {
    case TruncationRule::Kind::fixed_rank: {
      const auto wanted = static_cast<Eigen::Index>(rule.value);
      rank = std::min(wanted, available);
      clamped = wanted > available;
      break;
    }
    case TruncationRule::Kind::energy_fraction: {
      double kept = 0.0;
      rank = 0;
      while (rank < available) {
        kept += s(rank) * s(rank);
        ++rank;
        if (kept / total >= rule.value) break;
      }
      break;
    }
    case TruncationRule::Kind::singular_value_ratio: {
      rank = 0;
      while (rank < available && s(rank) / s(0) > rule.value) ++rank;
      rank = std::max<Eigen::Index>(rank, 1);
      break;
    }
  }

  TruncatedSvd out;
  out.rank = rank;
  out.rank_clamped = clamped;
  out.u = svd.matrixU().leftCols(rank);
  out.v = svd.matrixV().leftCols(rank);
  out.sigma = s.head(rank);
  out.all_singular_values = s;
  out.kept_energy = out.sigma.squaredNorm() / total;
  return out;
}

Eigen::MatrixXd reduced_operator(const Eigen::MatrixXd& u, const Eigen::VectorXd& sigma,
                                 const Eigen::MatrixXd& v, const Eigen::MatrixXd& x2) {
  require_shape(u.cols() == sigma.size() && v.cols() == sigma.size(), "U, Sigma and V ranks differ");
  require_shape(u.rows() == x2.rows(), "U and X2 row counts differ");
  require_shape(v.rows() == x2.cols(), "V and X2 column counts differ");
  require_shape((sigma.array() > 0.0).all(), "Sigma is not invertible");
  Eigen::MatrixXd projected = u.transpose() * (x2 * v);
  return projected * sigma.cwiseInverse().asDiagonal();
}

EigenModes eig_modes(const Eigen::MatrixXd& reduced, const Eigen::MatrixXd& u) {
  require_shape(reduced.rows() == reduced.cols(), "reduced operator is not square");
  require_shape(u.cols() == reduced.rows(), "U and reduced operator sizes differ");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(reduced, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::defective_operator, "eigendecomposition of the reduced operator failed; try rank " +
                                                   std::to_string(std::max<Eigen::Index>(1, reduced.rows() - 1)));
  }
  EigenModes out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
    const double norm = out.eigenvectors.col(k).norm();
    if (norm > 0.0) out.eigenvectors.col(k) /= norm;
  }
  if (out.eigenvectors.cols() > 1) {
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(out.eigenvectors);
    if (!(lu.rcond() * kEigenvectorConditionLimit > 1.0)) {
      throw Error(ErrorCode::defective_operator,
                  "reduced operator is defective (eigenvectors nearly dependent); try rank " +
                      std::to_string(reduced.rows() - 1));
    }
  }
  out.modes = u.cast<Complex>() * out.eigenvectors;
  return out;
}

Eigen::VectorXcd amplitudes(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& first_snapshot) {
  require_shape(modes.rows() == first_snapshot.size(), "mode and snapshot lengths differ");
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(modes);
  return cod.solve(first_snapshot);
}

DmdResult dmd(const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2, const TruncationRule& rule,
              double dt) {
  require_shape(x1.rows() == x2.rows() && x1.cols() == x2.cols(), "X1 and X2 shapes differ");
  if (x1.cols() < 1 || x1.rows() < 1) throw Error(ErrorCode::invalid_argument, "empty snapshot pair");
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "dt must be positive");

  const auto svd = svd_truncated(x1, rule);
  const Eigen::MatrixXd reduced = reduced_operator(svd.u, svd.sigma, svd.v, x2);
  const auto eig = eig_modes(reduced, svd.u);
  const Eigen::VectorXcd b = amplitudes(eig.modes, x1.col(0).cast<Complex>());

  const Eigen::Index r = svd.rank;
  std::vector<double> score(static_cast<std::size_t>(r));
  for (Eigen::Index k = 0; k < r; ++k) score[k] = std::abs(b(k)) * eig.modes.col(k).norm();
  // Conjugate partners share one score so the pair stays adjacent.
  for (Eigen::Index k = 0; k < r; ++k) {
    const Complex lk = eig.eigenvalues(k);
    if (lk.imag() <= 0.0) continue;
    for (Eigen::Index j = 0; j < r; ++j) {
      if (j != k && eig.eigenvalues(j) == std::conj(lk)) {
        const double shared = 0.5 * (score[k] + score[j]);
        score[k] = score[j] = shared;
        break;
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
    if (score[a] != score[c]) return score[a] > score[c];
    const double ma = std::abs(eig.eigenvalues(a));
    const double mc = std::abs(eig.eigenvalues(c));
    if (ma != mc) return ma > mc;
    const bool pa = eig.eigenvalues(a).imag() >= 0.0;
    const bool pc = eig.eigenvalues(c).imag() >= 0.0;
    if (pa != pc) return pa;
    return eig.eigenvalues(a).imag() > eig.eigenvalues(c).imag();
  });

  DmdResult out;
  out.rank = r;
  out.dt = dt;
  out.singular_values = svd.all_singular_values;
  out.rank_clamped = svd.rank_clamped;
  out.reduced_operator = reduced;
  out.modes.resize(eig.modes.rows(), r);
  out.eigenvectors.resize(r, r);
  out.eigenvalues.resize(r);
  out.amplitudes.resize(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.modes.col(k) = eig.modes.col(src);
    out.eigenvectors.col(k) = eig.eigenvectors.col(src);
    out.eigenvalues(k) = eig.eigenvalues(src);
    out.amplitudes(k) = b(src);
  }
  return out;
}

Eigen::VectorXcd reconstruct(const DmdResult& result, Eigen::Index j) {
  if (j < 1) throw Error(ErrorCode::invalid_argument, "snapshot index starts at 1");
  Eigen::VectorXcd weights(result.rank);
  for (Eigen::Index k = 0; k < result.rank; ++k) {
    weights(k) = std::pow(result.eigenvalues(k), static_cast<double>(j - 1)) * result.amplitudes(k);
    if (j == 1) weights(k) = result.amplitudes(k);
  }
  return result.modes * weights;
}

Eigen::MatrixXd reconstruct_window(const DmdResult& result, Eigen::Index columns) {
  Eigen::MatrixXcd dynamics(result.rank, columns);
  for (Eigen::Index k = 0; k < result.rank; ++k) {
    Complex value = result.amplitudes(k);
    for (Eigen::Index j = 0; j < columns; ++j) {
      dynamics(k, j) = value;
      value *= result.eigenvalues(k);
    }
  }
  return (result.modes * dynamics).real();
}

}  // namespace oscid
