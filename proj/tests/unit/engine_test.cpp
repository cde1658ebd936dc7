#include <gtest/gtest.h>

#include "helpers.hpp"
#include "rtsim/engine.hpp"
#include "rtsim/workload.hpp"

namespace rtsim {
namespace {

using test::events_of;
using test::job_of;
using test::make_task;
using test::response_of;
using test::single_processor;

TEST(Engine, SingleTaskNoResources) {
  auto s = single_processor({make_task(1, 3, 10, 1)});
  auto t = run(s, 30);
  ASSERT_EQ(t.jobs.size(), 3u);
  for (std::uint64_t j = 0; j < 3; ++j) EXPECT_EQ(response_of(t, 1, j), 3);
  EXPECT_EQ(t.processors[0].execution, 9);
  EXPECT_EQ(t.processors[0].idle, 21);
}

TEST(Engine, RejectsInvalidInput) {
  auto bad = make_task(1, 3, 10, 1);
  bad.deadline = 11;
  EXPECT_THROW(run(single_processor({bad}), 30), std::invalid_argument);
  EXPECT_THROW(run(single_processor({make_task(1, 3, 10, 1)}), 0), std::invalid_argument);
}

// Low task (C=12, section [6,10) of its work) starts at t=2 after the high
// task, enters its section at t=8 and holds it at t=10 when the high task's
// second job arrives with 2ns of section left. High acquires at t=12.
TEST(Engine, MpcpContentionDelayedByResidualSection) {
  auto pair = test::load_example("examples/mpcp_pair.cfg");
  auto t = run(pair, 30);
  auto acquires = events_of(t, EventKind::CsAcquire, 1);
  ASSERT_GE(acquires.size(), 2u);
  EXPECT_EQ(acquires[1].job, 1u);
  EXPECT_EQ(acquires[1].time, 12);

  auto alone = pair;
  alone.tasks.pop_back();
  auto a = run(alone, 30);
  auto solo = events_of(a, EventKind::CsAcquire, 1);
  ASSERT_GE(solo.size(), 2u);
  EXPECT_EQ(solo[1].time, 10);
  EXPECT_EQ(acquires[1].time - solo[1].time, 2);  // residual section length
  EXPECT_EQ(response_of(t, 1, 1), 4);
}

TEST(Engine, Table1DpcpAcquiresOnSynchronizationProcessor) {
  Table1Params p;
  p.protocol = Protocol::Dpcp;
  auto t = run(build_table1_scenario(p), 100 * kNsPerMs);
  auto acquires = events_of(t, EventKind::CsAcquire);
  ASSERT_FALSE(acquires.empty());
  for (const auto& e : acquires) EXPECT_EQ(e.processor, 3u);
}

Scenario one_section(Protocol protocol, OverheadModel o) {
  Scenario s;
  s.system.processors = 2;
  s.system.roles = {ProcessorRole::Application, ProcessorRole::Synchronization};
  s.system.protocol = protocol;
  s.system.overheads = o;
  s.resources.push_back({1, Priority{1}, 1});
  s.tasks.push_back(make_task(1, 100'000, 1'000'000, 1, 0, {{1, 40'000, 20'000}}));
  return s;
}

TEST(Engine, ZeroOverheadEmitsNoOverheadEvents) {
  auto t = run(one_section(Protocol::Mpcp, {}), 1'000'000);
  EXPECT_TRUE(events_of(t, EventKind::OverheadBegin).empty());
  EXPECT_TRUE(events_of(t, EventKind::OverheadEnd).empty());
}

TEST(Engine, MrspLockUnlockInflation) {
  OverheadModel mrsp;
  mrsp.lock = 5376;
  mrsp.unlock = 5514;
  for (auto p : {Protocol::Mpcp, Protocol::FmlpL, Protocol::FmlpS}) {
    auto base = run(one_section(p, {}), 1'000'000);
    auto with = run(one_section(p, mrsp), 1'000'000);
    EXPECT_EQ(response_of(with, 1, 0) - response_of(base, 1, 0), 10890) << to_string(p);
    EXPECT_EQ(job_of(with, 1, 0).executed, 100'000);  // overheads never count against C
    EXPECT_EQ(job_of(with, 1, 0).overhead, 10890);
  }
}

TEST(Engine, DistributedInflationIsAdditive) {
  OverheadModel o;
  o.migrate_to = 2000;
  o.migrate_back = 7000;
  o.lock = 3000;
  o.unlock = 4000;
  for (auto p : {Protocol::Dpcp, Protocol::Dflp}) {
    auto base = run(one_section(p, {}), 1'000'000);
    auto with = run(one_section(p, o), 1'000'000);
    EXPECT_EQ(response_of(with, 1, 0) - response_of(base, 1, 0), 2000 + 7000 + 3000 + 4000);
    EXPECT_EQ(job_of(with, 1, 0).migrations, 2u);
    // The mig_bk slice runs on the synchronization processor after release.
    auto ends = events_of(with, EventKind::OverheadEnd);
    ASSERT_EQ(ends.size(), 4u);
    EXPECT_EQ(ends[3].detail, EventDetail::MigBack);
    EXPECT_EQ(ends[3].processor, 1u);
  }
}

TEST(Engine, NoMigrateBackWhenSectionEndsTheJob) {
  auto s = one_section(Protocol::Dpcp, {});
  s.tasks[0].critical_sections[0].offset = 80'000;  // section ends at C
  auto t = run(s, 1'000'000);
  EXPECT_EQ(job_of(t, 1, 0).migrations, 1u);
  EXPECT_TRUE(events_of(t, EventKind::MigrateBack).empty());
  auto done = events_of(t, EventKind::JobComplete);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].processor, 1u);
}

TEST(Engine, MigrateToPrecedesRequest) {
  auto t = run(one_section(Protocol::Dflp, {}), 1'000'000);
  auto mig = events_of(t, EventKind::MigrateTo);
  auto req = events_of(t, EventKind::CsRequest);
  ASSERT_EQ(mig.size(), 1u);
  ASSERT_EQ(req.size(), 1u);
  EXPECT_LT(mig[0].sequence, req[0].sequence);
  EXPECT_EQ(mig[0].processor, 1u);
  EXPECT_EQ(req[0].processor, 1u);
}

TEST(Engine, ContextSwitchChargedAtDispatch) {
  auto s = single_processor({make_task(1, 3, 10, 1)});
  s.system.overheads.context_switch = 1;
  auto t = run(s, 10);
  EXPECT_EQ(response_of(t, 1, 0), 4);
  auto b = events_of(t, EventKind::OverheadBegin);
  ASSERT_EQ(b.size(), 1u);
  EXPECT_EQ(b[0].detail, EventDetail::Ctx);
}

TEST(Engine, HorizonCensorsUnfinishedJobs) {
  auto t = run(single_processor({make_task(1, 5, 10, 1)}), 12);
  ASSERT_EQ(t.jobs.size(), 2u);
  EXPECT_TRUE(t.jobs[0].completion.has_value());
  EXPECT_FALSE(t.jobs[1].completion.has_value());
  EXPECT_EQ(t.jobs[1].executed, 2);
}

// High C=8/T=10 leaves low (C=5, T=D=20) 2ns per period: low job 0 misses
// at t=20, keeps running and completes at 29; low job 1, released at 20,
// waits behind it.
TEST(Engine, DeadlineMissDoesNotAbort) {
  auto s = single_processor({make_task(1, 8, 10, 1), make_task(2, 5, 20, 2)});
  auto t = run(s, 40);
  auto misses = events_of(t, EventKind::DeadlineCheck, 2);
  ASSERT_FALSE(misses.empty());
  EXPECT_EQ(misses[0].time, 20);
  EXPECT_EQ(misses[0].job, 0u);
  EXPECT_EQ(misses[0].detail, EventDetail::Miss);
  const auto& j0 = job_of(t, 2, 0);
  EXPECT_TRUE(j0.missed);
  EXPECT_EQ(j0.completion, 29);
  EXPECT_EQ(j0.executed, 5);
  auto dispatch = events_of(t, EventKind::Dispatch, 2);
  auto first_of_job1 = std::find_if(dispatch.begin(), dispatch.end(),
                                    [](const Event& e) { return e.job == 1; });
  ASSERT_NE(first_of_job1, dispatch.end());
  EXPECT_EQ(first_of_job1->time, 29);
}

// A on P0 holds the resource over [0,3); B on P1 requests at t=1.
Scenario spin_pair(Protocol p) {
  Scenario s;
  s.system.processors = 2;
  s.system.roles = {ProcessorRole::Application, ProcessorRole::Application};
  s.system.protocol = p;
  s.resources.push_back({1, Priority{1}, std::nullopt});
  s.tasks.push_back(make_task(1, 4, 100, 1, 0, {{1, 0, 3}}));
  s.tasks.push_back(make_task(2, 3, 100, 2, 1, {{1, 1, 1}}));
  return s;
}

TEST(Engine, SpinVersusSuspendAccounting) {
  auto spin = run(spin_pair(Protocol::FmlpS), 10);
  EXPECT_EQ(spin.processors[1].spin, 2);
  EXPECT_EQ(spin.processors[1].execution, 3);
  EXPECT_EQ(job_of(spin, 2, 0).blocking, 2);
  EXPECT_EQ(response_of(spin, 2, 0), 5);

  auto suspend = run(spin_pair(Protocol::FmlpL), 10);
  EXPECT_EQ(suspend.processors[1].spin, 0);
  EXPECT_EQ(suspend.processors[1].idle, 7);
  EXPECT_EQ(job_of(suspend, 2, 0).blocking, 2);
  EXPECT_EQ(events_of(suspend, EventKind::Suspend).size(), 1u);
  EXPECT_EQ(events_of(suspend, EventKind::Resume).size(), 1u);
}

TEST(Engine, HandOffOrderingWithinAnInstant) {
  auto t = run(spin_pair(Protocol::FmlpL), 10);
  auto rel = events_of(t, EventKind::CsRelease, 1);
  auto acq = events_of(t, EventKind::CsAcquire, 2);
  ASSERT_EQ(rel.size(), 1u);
  ASSERT_EQ(acq.size(), 1u);
  EXPECT_EQ(rel[0].time, 3);
  EXPECT_EQ(acq[0].time, 3);
  EXPECT_LT(rel[0].sequence, acq[0].sequence);
  // Releases come first at any instant.
  for (std::size_t k = 1; k < t.events.size(); ++k) {
    if (t.events[k].kind == EventKind::JobRelease && t.events[k].time == t.events[k - 1].time) {
      EXPECT_EQ(t.events[k - 1].kind, EventKind::JobRelease);
    }
  }
}

TEST(Engine, Deterministic) {
  Table1Params p;
  p.protocol = Protocol::Dflp;
  p.overheads.lock = 700;
  p.overheads.context_switch = 50;
  auto s = build_table1_scenario(p);
  auto a = run(s, 200 * kNsPerMs, 7);
  auto b = run(s, 200 * kNsPerMs, 7);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.jobs, b.jobs);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  auto c = run(s, 200 * kNsPerMs, 8);
  EXPECT_EQ(a.events, c.events);  // the seed only labels the run
  EXPECT_NE(a.fingerprint, c.fingerprint);
}

TEST(Engine, SequenceIsStrictAndTimeMonotone) {
  auto t = run(build_table1_scenario(), 100 * kNsPerMs);
  for (std::size_t k = 1; k < t.events.size(); ++k) {
    EXPECT_LT(t.events[k - 1].sequence, t.events[k].sequence);
    EXPECT_LE(t.events[k - 1].time, t.events[k].time);
  }
}

TEST(Engine, MutationStretchesSections) {
  EngineOptions o;
  o.mutation = Mutation::StretchCriticalSection;
  auto base = run(one_section(Protocol::Mpcp, {}), 1'000'000);
  auto bent = run(one_section(Protocol::Mpcp, {}), 1'000'000, 0, o);
  EXPECT_EQ(response_of(bent, 1, 0), response_of(base, 1, 0) + 1);
}

TEST(Engine, PhaseNames) {
  EXPECT_EQ(to_string(Phase::InCriticalSection), "IN_CS");
  EXPECT_EQ(to_string(Phase::Spinning), "SPINNING");
}

}  // namespace
}  // namespace rtsim
