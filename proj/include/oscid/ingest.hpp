#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oscid {

enum class FillPolicy { zero, hold_last };

FillPolicy parse_fill_policy(std::string_view name);
std::string_view to_string(FillPolicy policy) noexcept;

struct Channel {
  std::string name;
  std::vector<double> values;
  std::vector<bool> missing;

  bool operator==(const Channel&) const = default;
};

// Uniformly sampled multichannel record. Missing samples are flagged in the
// per-channel mask and already filled according to fill_policy(), so every
// stored value is finite.
class SignalRecord {
 public:
  // Values flagged missing are (re)filled here; non-finite values are
  // treated as missing.
  SignalRecord(std::vector<Channel> channels, double dt, double t0 = 0.0,
               FillPolicy fill = FillPolicy::zero);

  const std::vector<Channel>& channels() const noexcept { return channels_; }
  const Channel& channel(std::string_view name) const;
  const Channel& channel(std::size_t index) const { return channels_.at(index); }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  std::size_t length() const noexcept { return channels_.front().values.size(); }
  double dt() const noexcept { return dt_; }
  double t0() const noexcept { return t0_; }
  FillPolicy fill_policy() const noexcept { return fill_; }
  double time_at(std::size_t index) const noexcept {
    return t0_ + static_cast<double>(index) * dt_;
  }

  std::size_t missing_count(std::size_t channel_index) const;

  // Sample data, masks and fill policy compare exactly; dt and t0 within
  // 1e-12 relative, since a CSV round trip re-derives dt from printed times.
  bool operator==(const SignalRecord& other) const;

 private:
  std::vector<Channel> channels_;
  double dt_;
  double t0_;
  FillPolicy fill_;
};

void apply_fill(Channel& channel, FillPolicy policy);

struct IngestConfig {
  bool header = true;
  // First column holds sample times in seconds.
  bool time_column = false;
  std::optional<double> dt;
  double t0 = 0.0;
  FillPolicy fill = FillPolicy::zero;
};

SignalRecord read_csv(std::istream& in, const IngestConfig& config);
SignalRecord load_csv(const std::filesystem::path& path, const IngestConfig& config);

// Writes a header row, a time column and one column per channel. Missing
// samples are written as `NaN` so that a reload restores the mask.
void write_csv(std::ostream& out, const SignalRecord& record);
void save_csv(const std::filesystem::path& path, const SignalRecord& record);

// Masks [start, start + length) on every channel and refills it with the
// record's fill policy.
SignalRecord inject_gap(const SignalRecord& record, std::size_t start, std::size_t length);

}  // namespace oscid
