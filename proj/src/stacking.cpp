#include "oscid/stacking.hpp"

#include <algorithm>

#include "oscid/error.hpp"

namespace oscid {

std::size_t default_stack_depth(std::size_t record_length) noexcept {
  return std::max<std::size_t>(1, record_length / 5);
}

SnapshotMatrix delay_embed(const SignalRecord& record, std::string_view channel,
                           std::size_t stack_depth) {
  const std::string name(channel);
  return delay_embed_joint(record, std::span<const std::string>(&name, 1), stack_depth);
}

SnapshotMatrix delay_embed_joint(const SignalRecord& record,
                                 std::span<const std::string> channels,
                                 std::size_t stack_depth) {
  if (channels.empty()) throw Error(ErrorCode::invalid_argument, "no channels selected");
  const std::size_t length = record.length();
  // At least two columns must remain.
  const std::size_t max_depth = length - 1;
  if (stack_depth < 1 || stack_depth > max_depth) {
    throw Error(ErrorCode::invalid_argument,
                "stack depth " + std::to_string(stack_depth) + " infeasible for " +
                    std::to_string(length) + " samples; maximum is " + std::to_string(max_depth));
  }
  std::vector<const std::vector<double>*> sources;
  for (const auto& name : channels) sources.push_back(&record.channel(name).values);

  const auto depth = static_cast<Eigen::Index>(stack_depth);
  const auto width = static_cast<Eigen::Index>(sources.size());
  const auto cols = static_cast<Eigen::Index>(length - stack_depth + 1);
  SnapshotMatrix out;
  out.data.resize(depth * width, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < depth; ++i) {
      for (Eigen::Index c = 0; c < width; ++c) {
        out.data(i * width + c, j) = (*sources[static_cast<std::size_t>(c)])[static_cast<std::size_t>(j + i)];
      }
    }
  }
  // Prefix count of missing samples over all selected channels.
  std::vector<std::size_t> missing_before(length + 1, 0);
  for (std::size_t i = 0; i < length; ++i) {
    bool any = false;
    for (const auto& name : channels) any = any || record.channel(name).missing[i];
    missing_before[i + 1] = missing_before[i] + (any ? 1 : 0);
  }
  out.masked_columns.resize(static_cast<std::size_t>(cols));
  for (std::size_t j = 0; j < static_cast<std::size_t>(cols); ++j) {
    out.masked_columns[j] = missing_before[j + stack_depth] > missing_before[j];
  }
  out.dt = record.dt();
  out.t0 = record.t0();
  out.stack_depth = stack_depth;
  out.source_channel = channels.front();
  for (std::size_t c = 1; c < channels.size(); ++c) out.source_channel += "+" + channels[c];
  return out;
}

ShiftedPair shifted_pair(const SnapshotMatrix& snapshots) {
  const auto n = snapshots.cols();
  if (n < 2 || snapshots.rows() < 1) {
    throw Error(ErrorCode::invalid_argument, "snapshot matrix needs at least 2 columns");
  }
  return {snapshots.data.leftCols(n - 1), snapshots.data.rightCols(n - 1)};
}

}  // namespace oscid
