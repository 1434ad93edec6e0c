#include <gtest/gtest.h>

#include "fixture.h"
#include "ncsched/errors.h"
#include "ncsched/scheduling_logic.h"

namespace ncsched {
namespace {

Cycle composed_cycle() {
  return {{ActiveSet::of({1, 2}), ActiveSet::of({2, 4}), ActiveSet::of({3, 4}),
           ActiveSet::of({3, 5})},
          {2, 1, 1, 2}};
}

TEST(ScheduleLogic, ComposedExampleWindows) {
  const ScheduleLogic s(composed_cycle(), 2);
  EXPECT_EQ(s.period(), 18);
  EXPECT_EQ(s.capacity(), 2);
  ASSERT_EQ(s.segments().size(), 4u);
  const long long starts[] = {0, 6, 9, 12};
  const long long lengths[] = {6, 3, 3, 6};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(s.segments()[k].start, starts[k]);
    EXPECT_EQ(s.segments()[k].length, lengths[k]);
  }
  EXPECT_EQ(s.gamma_at(0), (std::vector<int>{1, 2}));
  EXPECT_EQ(s.gamma_at(5), (std::vector<int>{1, 2}));
  EXPECT_EQ(s.gamma_at(6), (std::vector<int>{2, 4}));
  EXPECT_EQ(s.gamma_at(7), (std::vector<int>{2, 4}));
  EXPECT_EQ(s.gamma_at(11), (std::vector<int>{3, 4}));
  EXPECT_EQ(s.gamma_at(17), (std::vector<int>{3, 5}));
  EXPECT_EQ(s.gamma_at(18), (std::vector<int>{1, 2}));
}

TEST(ScheduleLogic, PeriodicAndTiling) {
  const ScheduleLogic s(composed_cycle(), 2);
  for (long long t = 0; t < 5 * s.period(); ++t) {
    EXPECT_EQ(s.segment_at(t), s.segment_at(t + s.period()));
    EXPECT_EQ(static_cast<int>(s.gamma_at(t).size()), s.capacity());
  }
  long long covered = 0;
  for (const auto& seg : s.segments()) {
    EXPECT_EQ(seg.start, covered);
    covered += seg.length;
  }
  EXPECT_EQ(covered, s.period());
}

TEST(ScheduleLogic, ChannelAssignment) {
  const ScheduleLogic s(composed_cycle(), 2);
  EXPECT_EQ(s.channel_of(2, 0), 1);
  EXPECT_EQ(s.channel_of(2, 6), 0);
  EXPECT_EQ(s.channel_of(5, 0), -1);
  EXPECT_EQ(s.channel_of(5, 12), 1);
}

TEST(ScheduleLogic, ZeroBurstHoldsForT) {
  const ScheduleLogic s(composed_cycle(), 0);
  EXPECT_EQ(s.period(), 6);
  EXPECT_EQ(closed_loop_duration_bounds(s, 0), (std::pair<long long, long long>{2, 2}));
}

TEST(ScheduleLogic, Rejections) {
  EXPECT_THROW(ScheduleLogic(composed_cycle(), -1), ValidationError);
  Cycle mixed{{ActiveSet::of({1, 2}), ActiveSet::of({3})}, {1, 1}};
  EXPECT_THROW(ScheduleLogic(mixed, 1), ValidationError);
  EXPECT_THROW(ScheduleLogic(composed_cycle(), 2).segment_at(-1), ValidationError);
  EXPECT_THROW(closed_loop_duration_bounds(ScheduleLogic(composed_cycle(), 2), 4),
               ValidationError);
}

TEST(BuildSchedule, RequiresContraction) {
  const auto& ref = testing::reference_scalars();
  EXPECT_NO_THROW(build_schedule(composed_cycle(), 2, ref, true));
  EXPECT_THROW(build_schedule(composed_cycle(), 4, ref, true), InfeasibleError);
  EXPECT_NO_THROW(build_schedule(composed_cycle(), 4, ref, false));
}

TEST(DurationBounds, ComposedExample) {
  const ScheduleLogic s(composed_cycle(), 2);
  EXPECT_EQ(closed_loop_duration_bounds(s, 0), (std::pair<long long, long long>{2, 6}));
  EXPECT_EQ(closed_loop_duration_bounds(s, 1), (std::pair<long long, long long>{1, 3}));
  EXPECT_EQ(gamma_at(s, 9), (std::vector<int>{3, 4}));
}

}  // namespace
}  // namespace ncsched
