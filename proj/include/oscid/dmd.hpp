#pragma once

#include <complex>

#include <Eigen/Dense>

namespace oscid {

using Complex = std::complex<double>;

// How many singular triplets svd_truncated keeps.
struct TruncationRule {
  enum class Kind { fixed_rank, energy_fraction, singular_value_ratio };

  Kind kind = Kind::energy_fraction;
  double value = 0.9999;

  static TruncationRule fixed_rank(Eigen::Index rank);
  static TruncationRule energy_fraction(double fraction);
  static TruncationRule singular_value_ratio(double ratio);

  // Throws on a value outside the kind's domain.
  void validate() const;
};

// Singular values below this fraction of the largest one are never kept,
// whatever the rule says.
inline constexpr double kSingularValueFloor = 1e-12;

struct TruncatedSvd {
  Eigen::MatrixXd u;             // m x r
  Eigen::VectorXd sigma;         // r, strictly positive and non-increasing
  Eigen::MatrixXd v;             // (n-1) x r
  Eigen::VectorXd all_singular_values;
  Eigen::Index rank = 0;
  double kept_energy = 0.0;
  // The rule asked for more triplets than there are usable singular values.
  bool rank_clamped = false;
};

TruncatedSvd svd_truncated(const Eigen::MatrixXd& x, const TruncationRule& rule);

// U^T * X2 * V * Sigma^-1, without ever forming the full m x m operator.
Eigen::MatrixXd reduced_operator(const Eigen::MatrixXd& u, const Eigen::VectorXd& sigma,
                                 const Eigen::MatrixXd& v, const Eigen::MatrixXd& x2);

struct EigenModes {
  Eigen::MatrixXcd eigenvectors;  // W, unit-norm columns
  Eigen::VectorXcd eigenvalues;   // Lambda
  Eigen::MatrixXcd modes;         // Phi = U * W
};

// Rejects a (numerically) defective reduced operator.
EigenModes eig_modes(const Eigen::MatrixXd& reduced, const Eigen::MatrixXd& u);

// Least-squares amplitudes: pinv(Phi) * x1.
Eigen::VectorXcd amplitudes(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& first_snapshot);

struct DmdResult {
  Eigen::MatrixXcd modes;
  Eigen::VectorXcd eigenvalues;
  Eigen::VectorXcd amplitudes;
  Eigen::Index rank = 0;
  double dt = 0.0;
  Eigen::VectorXd singular_values;
  bool rank_clamped = false;
  // Retained for residual checks.
  Eigen::MatrixXd reduced_operator;
  Eigen::MatrixXcd eigenvectors;
};

// Full pipeline on a snapshot pair. Modes are ordered by descending
// |b_k| * ||Phi_k||, then descending |lambda_k|, then non-negative imaginary
// part first.
DmdResult dmd(const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2, const TruncationRule& rule,
              double dt);

// sum_k Phi_k lambda_k^(j-1) b_k for snapshot index j >= 1.
Eigen::VectorXcd reconstruct(const DmdResult& result, Eigen::Index j);

// Real part of the reconstruction for snapshots 1..columns, one per column.
Eigen::MatrixXd reconstruct_window(const DmdResult& result, Eigen::Index columns);

}  // namespace oscid
