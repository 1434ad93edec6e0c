#pragma once

#include <utility>
#include <vector>

#include "ncsched/cycle_synthesis.h"

namespace ncsched {

struct ScheduleSegment {
  std::vector<int> active;  // ascending plant ids; channel j carries active[j]
  long long start = 0;      // window [start, start + length) within a period
  long long length = 0;
  long long t_factor = 0;
};

/// Periodic scheduling map built from a cycle: vertex k is held for
/// T_k (ell + 1) consecutive instants, the windows repeat with period
/// sum_k T_k (ell + 1).
class ScheduleLogic {
 public:
  ScheduleLogic() = default;
  ScheduleLogic(Cycle cycle, int max_burst);

  const Cycle& cycle() const { return cycle_; }
  int max_burst() const { return max_burst_; }
  long long period() const { return period_; }
  int capacity() const { return capacity_; }
  const std::vector<ScheduleSegment>& segments() const { return segments_; }

  /// Segment index active at time t >= 0.
  int segment_at(long long t) const;
  /// Active plants at time t, ascending.
  const std::vector<int>& gamma_at(long long t) const;
  /// Channel (0-based) carrying `plant` at time t, or -1 when it is idle.
  int channel_of(int plant, long long t) const;

 private:
  Cycle cycle_;
  int max_burst_ = 0;
  int capacity_ = 0;
  long long period_ = 0;
  std::vector<ScheduleSegment> segments_;
  std::vector<long long> starts_;
};

/// Throws ValidationError for an invalid cycle (n < 2, non-positive T,
/// repeated adjacent vertices) or mixed active-set sizes. When
/// `require_contractive` is set, also throws InfeasibleError unless the cycle
/// is contractive for `certs`.
ScheduleLogic build_schedule(const Cycle& cycle, int max_burst);
ScheduleLogic build_schedule(const Cycle& cycle, int max_burst,
                             std::span<const CertificateScalars> certs,
                             bool require_contractive);

inline const std::vector<int>& gamma_at(const ScheduleLogic& schedule,
                                        long long t) {
  return schedule.gamma_at(t);
}

/// Guaranteed and maximal loss-free steps of window k under any admissible
/// loss signal: (T_k, T_k (ell + 1)).
std::pair<long long, long long> closed_loop_duration_bounds(
    const ScheduleLogic& schedule, int k);

}  // namespace ncsched
