#include "ncsched/scheduling_logic.h"

#include <algorithm>

#include "ncsched/errors.h"

namespace ncsched {

ScheduleLogic::ScheduleLogic(Cycle cycle, int max_burst)
    : cycle_(std::move(cycle)), max_burst_(max_burst) {
  validate_cycle(cycle_);
  if (max_burst_ < 0) throw ValidationError("max burst length must be >= 0");
  capacity_ = cycle_.vertices.front().size();
  long long start = 0;
  for (std::size_t k = 0; k < cycle_.vertices.size(); ++k) {
    const Vertex v = cycle_.vertices[k];
    if (v.size() != capacity_) {
      throw ValidationError("cycle vertices have different active-set sizes");
    }
    ScheduleSegment seg;
    seg.active = v.plants();
    seg.start = start;
    seg.t_factor = cycle_.t_factors[k];
    seg.length = seg.t_factor * (max_burst_ + 1);
    starts_.push_back(start);
    start += seg.length;
    segments_.push_back(std::move(seg));
  }
  period_ = start;
}

int ScheduleLogic::segment_at(long long t) const {
  if (t < 0) throw ValidationError("schedule queried at negative time");
  if (segments_.empty()) throw ValidationError("empty schedule");
  const long long phase = t % period_;
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), phase);
  return static_cast<int>(it - starts_.begin()) - 1;
}

const std::vector<int>& ScheduleLogic::gamma_at(long long t) const {
  return segments_[static_cast<std::size_t>(segment_at(t))].active;
}

int ScheduleLogic::channel_of(int plant, long long t) const {
  const auto& active = gamma_at(t);
  const auto it = std::lower_bound(active.begin(), active.end(), plant);
  if (it == active.end() || *it != plant) return -1;
  return static_cast<int>(it - active.begin());
}

ScheduleLogic build_schedule(const Cycle& cycle, int max_burst) {
  return ScheduleLogic(cycle, max_burst);
}

ScheduleLogic build_schedule(const Cycle& cycle, int max_burst,
                             std::span<const CertificateScalars> certs,
                             bool require_contractive) {
  if (require_contractive) {
    const ContractionResult r = is_contractive(cycle, certs, max_burst);
    if (!r.contractive) {
      throw InfeasibleError("cycle is not contractive (epsilon = " +
                            std::to_string(r.epsilon) + ")");
    }
  }
  return ScheduleLogic(cycle, max_burst);
}

std::pair<long long, long long> closed_loop_duration_bounds(
    const ScheduleLogic& schedule, int k) {
  if (k < 0 || k >= static_cast<int>(schedule.segments().size())) {
    throw ValidationError("segment index out of range");
  }
  const long long t = schedule.segments()[static_cast<std::size_t>(k)].t_factor;
  return {t, t * (schedule.max_burst() + 1)};
}

}  // namespace ncsched
