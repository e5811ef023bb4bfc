#include "oscid/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "oscid/error.hpp"

namespace oscid {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  return text;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

// nullopt for a missing marker (empty cell or any-case "nan").
std::optional<double> parse_cell(std::string_view cell, std::size_t row, std::size_t column) {
  if (cell.empty() || lower(cell) == "nan") return std::nullopt;
  double value = 0.0;
  const char* first = cell.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::parse, "row " + std::to_string(row) + " column " + std::to_string(column) +
                                      ": cannot parse '" + std::string(cell) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

}  // namespace

FillPolicy parse_fill_policy(std::string_view name) {
  const auto key = lower(name);
  if (key == "zero") return FillPolicy::zero;
  if (key == "hold" || key == "hold_last" || key == "hold-last") return FillPolicy::hold_last;
  throw Error(ErrorCode::invalid_argument, "unknown fill policy '" + std::string(name) + "'");
}

std::string_view to_string(FillPolicy policy) noexcept {
  return policy == FillPolicy::zero ? "zero" : "hold-last";
}

void apply_fill(Channel& channel, FillPolicy policy) {
  double last = 0.0;
  for (std::size_t i = 0; i < channel.values.size(); ++i) {
    if (!std::isfinite(channel.values[i])) channel.missing[i] = true;
    if (channel.missing[i]) {
      channel.values[i] = policy == FillPolicy::zero ? 0.0 : last;
    } else {
      last = channel.values[i];
    }
  }
}

SignalRecord::SignalRecord(std::vector<Channel> channels, double dt, double t0, FillPolicy fill)
    : channels_(std::move(channels)), dt_(dt), t0_(t0), fill_(fill) {
  if (channels_.empty()) throw Error(ErrorCode::invalid_argument, "record has no channels");
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw Error(ErrorCode::invalid_argument, "sample interval must be positive and finite");
  }
  if (!std::isfinite(t0_)) throw Error(ErrorCode::invalid_argument, "start time must be finite");
  const auto length = channels_.front().values.size();
  if (length < 2) throw Error(ErrorCode::invalid_argument, "record needs at least 2 samples");
  for (auto& channel : channels_) {
    if (channel.values.size() != length) {
      throw Error(ErrorCode::shape_mismatch, "channel '" + channel.name + "' has a different length");
    }
    if (channel.missing.empty()) channel.missing.assign(length, false);
    if (channel.missing.size() != length) {
      throw Error(ErrorCode::shape_mismatch, "mask of channel '" + channel.name + "' has a different length");
    }
    apply_fill(channel, fill_);
  }
}

const Channel& SignalRecord::channel(std::string_view name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::invalid_argument, "no channel named '" + std::string(name) + "'");
}

bool SignalRecord::operator==(const SignalRecord& other) const {
  const auto close = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max({1e-300, std::fabs(a), std::fabs(b)});
  };
  return channels_ == other.channels_ && fill_ == other.fill_ && close(dt_, other.dt_) &&
         (t0_ == other.t0_ || close(t0_, other.t0_));
}

std::size_t SignalRecord::missing_count(std::size_t channel_index) const {
  const auto& mask = channels_.at(channel_index).missing;
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

SignalRecord read_csv(std::istream& in, const IngestConfig& config) {
  if (config.dt && !(*config.dt > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "configured dt must be positive");
  }
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> rows;
  std::string line;
  std::size_t line_number = 0;
  bool header_pending = config.header;
  std::size_t width = 0;
  // In a one-column file a blank line is an empty cell. Blank lines at the
  // end of the file are dropped.
  std::size_t pending_blank = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      if (!header_pending) ++pending_blank;
      continue;
    }
    const auto cells = split_row(line);
    if (width == 1 && cells.size() == 1) {
      for (; pending_blank > 0; --pending_blank) rows.emplace_back(1, std::nullopt);
    }
    pending_blank = 0;
    if (header_pending) {
      for (auto cell : cells) names.emplace_back(cell);
      width = cells.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_number) + ": expected " +
                                        std::to_string(width) + " cells, got " +
                                        std::to_string(cells.size()));
    }
    auto& row = rows.emplace_back();
    row.reserve(width);
    for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(parse_cell(cells[c], line_number, c));
  }
  if (rows.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least 2 data rows, got " + std::to_string(rows.size()));
  const std::size_t first_data = config.time_column ? 1 : 0;
  if (width <= first_data) throw Error(ErrorCode::parse, "no data columns");

  double dt = config.dt.value_or(0.0);
  double t0 = config.t0;
  if (config.time_column) {
    std::vector<double> times;
    times.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i][0]) throw Error(ErrorCode::parse, "missing time value at row index " + std::to_string(i));
      times.push_back(*rows[i][0]);
    }
    const double spacing = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(spacing > 0.0)) throw Error(ErrorCode::non_uniform_time, "time column is not increasing");
    const double tolerance = 1e-6 * spacing;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double expected = times.front() + static_cast<double>(i) * spacing;
      if (std::fabs(times[i] - expected) > tolerance) {
        throw Error(ErrorCode::non_uniform_time,
                    "non-uniform time column at row index " + std::to_string(i));
      }
    }
    if (config.dt && std::fabs(*config.dt - spacing) > 1e-6 * spacing) {
      throw Error(ErrorCode::non_uniform_time, "time column spacing " + format_double(spacing) +
                                                   " disagrees with configured dt " +
                                                   format_double(*config.dt));
    }
    dt = spacing;
    t0 = times.front();
  } else if (!config.dt) {
    throw Error(ErrorCode::invalid_argument, "no time column and no dt configured");
  }

  std::vector<Channel> channels;
  for (std::size_t c = first_data; c < width; ++c) {
    Channel channel;
    channel.name = c < names.size() && !names[c].empty() ? names[c] : "ch" + std::to_string(c - first_data);
    channel.values.reserve(rows.size());
    channel.missing.reserve(rows.size());
    for (const auto& row : rows) {
      channel.missing.push_back(!row[c].has_value());
      channel.values.push_back(row[c].value_or(0.0));
    }
    channels.push_back(std::move(channel));
  }
  return SignalRecord(std::move(channels), dt, t0, config.fill);
}

SignalRecord load_csv(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  return read_csv(in, config);
}

void write_csv(std::ostream& out, const SignalRecord& record) {
  out << "t";
  for (const auto& channel : record.channels()) out << ',' << channel.name;
  out << '\n';
  for (std::size_t i = 0; i < record.length(); ++i) {
    out << format_double(record.time_at(i));
    for (const auto& channel : record.channels()) {
      out << ',' << (channel.missing[i] ? std::string("NaN") : format_double(channel.values[i]));
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const SignalRecord& record) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
  write_csv(out, record);
}

SignalRecord inject_gap(const SignalRecord& record, std::size_t start, std::size_t length) {
  if (start > record.length() || length > record.length() - start) {
    throw Error(ErrorCode::invalid_argument, "gap [" + std::to_string(start) + ", " +
                                                 std::to_string(start + length) + ") exceeds record length " +
                                                 std::to_string(record.length()));
  }
  auto channels = record.channels();
  for (auto& channel : channels) {
    double hold = 0.0;
    for (std::size_t i = start; i-- > 0;) {
      if (!channel.missing[i]) {
        hold = channel.values[i];
        break;
      }
    }
    for (std::size_t i = start; i < start + length; ++i) {
      channel.missing[i] = true;
      channel.values[i] = record.fill_policy() == FillPolicy::zero ? 0.0 : hold;
    }
  }
  return SignalRecord(std::move(channels), record.dt(), record.t0(), record.fill_policy());
}

}  // namespace oscid
