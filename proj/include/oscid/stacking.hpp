#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "oscid/ingest.hpp"

namespace oscid {

// Delay-embedded snapshot matrix: entry (i, j) of a single-channel embedding
// is raw sample j + i, so column j is the state at time t0 + j * dt.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  double dt = 0.0;
  double t0 = 0.0;
  std::size_t stack_depth = 1;
  std::string source_channel;
  // Column j holds at least one sample flagged missing in the source record.
  std::vector<bool> masked_columns;

  Eigen::Index rows() const noexcept { return data.rows(); }
  Eigen::Index cols() const noexcept { return data.cols(); }
};

struct ShiftedPair {
  Eigen::MatrixXd first;   // columns 0 .. n-2
  Eigen::MatrixXd second;  // columns 1 .. n-1
};

// Depth of 1000 for a 5000-sample record, proportional otherwise.
std::size_t default_stack_depth(std::size_t record_length) noexcept;

SnapshotMatrix delay_embed(const SignalRecord& record, std::string_view channel,
                           std::size_t stack_depth);

// Block-Hankel embedding of several channels: row (i * channels + c) holds
// channel c delayed by i samples.
SnapshotMatrix delay_embed_joint(const SignalRecord& record,
                                 std::span<const std::string> channels,
                                 std::size_t stack_depth);

ShiftedPair shifted_pair(const SnapshotMatrix& snapshots);

}  // namespace oscid
