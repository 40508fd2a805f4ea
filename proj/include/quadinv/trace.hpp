#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace quadinv {

/// One sample of a solver trajectory.
struct TraceRecord {
  std::uint64_t iter = 0;
  std::optional<std::uint64_t> epoch;
  std::optional<std::string> phase;
  std::optional<std::uint64_t> sample_index;
  double loss = 0.0;
  std::optional<double> err_fro;
  std::uint64_t wallclock_ns = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Ordered solver history; iter is strictly increasing.
class Trace {
public:
  /// Throws PreconditionError on a non-increasing iter or a non-finite or
  /// negative loss / err_fro.
  void append(TraceRecord record);

  const std::vector<TraceRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t size() const noexcept { return records_.size(); }
  const TraceRecord& back() const { return records_.back(); }
  TraceRecord& back() { return records_.back(); }

  friend bool operator==(const Trace&, const Trace&) = default;

private:
  std::vector<TraceRecord> records_;
};

} // namespace quadinv
