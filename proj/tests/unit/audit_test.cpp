#include <gtest/gtest.h>

#include "helpers.hpp"
#include "rtsim/audit.hpp"
#include "rtsim/workload.hpp"

namespace rtsim {
namespace {

using test::make_task;

Scenario fifo_triple(Protocol p) {
  Scenario s;
  s.system.processors = 4;
  s.system.roles.assign(4, ProcessorRole::Application);
  s.system.protocol = p;
  s.resources.push_back({1, Priority{1}, std::nullopt});
  s.tasks.push_back(make_task(1, 10, 100, 3, 0, {{1, 0, 5}}));
  s.tasks.push_back(make_task(2, 10, 100, 2, 1, {{1, 1, 2}}));
  s.tasks.push_back(make_task(3, 10, 100, 1, 2, {{1, 2, 2}}));
  return s;
}

TEST(Audit, CleanTracesPass) {
  for (auto p : kAllProtocols) {
    Table1Params params;
    params.protocol = p;
    params.overheads = {100, 200, 300, 400, 50};
    auto s = build_table1_scenario(params);
    auto t = run(s, 100 * kNsPerMs);
    EXPECT_EQ(audit_all(t, s), Findings{}) << to_string(p);
    auto f = with_protocol(fifo_triple(Protocol::Mpcp), p);
    if (is_distributed(p)) continue;
    EXPECT_EQ(audit_all(run(f, 100), f), Findings{}) << to_string(p);
  }
}

TEST(Audit, DetectsOverlap) {
  auto s = fifo_triple(Protocol::FmlpL);
  auto t = run(s, 100);
  // Pretend job 2 acquired right after its request, while job 1 still held.
  auto req = test::events_of(t, EventKind::CsRequest, 2).at(0);
  auto it = std::find_if(t.events.begin(), t.events.end(), [](const Event& e) {
    return e.kind == EventKind::CsAcquire && e.task == 2;
  });
  ASSERT_NE(it, t.events.end());
  Event moved = *it;
  t.events.erase(it);
  moved.time = req.time;
  auto pos = std::find_if(t.events.begin(), t.events.end(),
                          [&](const Event& e) { return e.sequence == req.sequence; });
  t.events.insert(pos + 1, moved);
  EXPECT_FALSE(audit_mutual_exclusion(t).empty());
}

TEST(Audit, DetectsFifoViolation) {
  auto s = fifo_triple(Protocol::FmlpL);
  auto t = run(s, 100);
  EXPECT_TRUE(audit_fifo(t, s).empty());
  // Swap the hand-off order of tasks 2 and 3 by swapping their ids in the
  // acquisition events.
  for (auto& e : t.events) {
    if (e.kind == EventKind::CsAcquire && (e.task == 2 || e.task == 3)) e.task = 5 - e.task;
  }
  EXPECT_FALSE(audit_fifo(t, s).empty());
}

TEST(Audit, MpcpGrantsByPriority) {
  auto s = fifo_triple(Protocol::Mpcp);
  auto t = run(s, 100);
  EXPECT_TRUE(audit_ceiling_and_grant_order(t, s).empty());
  // Under MPCP task 3 (more urgent) must get the resource before task 2.
  auto acq = test::events_of(t, EventKind::CsAcquire);
  ASSERT_EQ(acq.size(), 3u);
  EXPECT_EQ(acq[0].task, 1u);
  EXPECT_EQ(acq[1].task, 3u);
  EXPECT_EQ(acq[2].task, 2u);
  // ... while FIFO protocols honour arrival order.
  auto fifo = fifo_triple(Protocol::FmlpL);
  auto f = test::events_of(run(fifo, 100), EventKind::CsAcquire);
  EXPECT_EQ(f[1].task, 2u);
  EXPECT_EQ(f[2].task, 3u);
}

TEST(Audit, DetectsCeilingBreach) {
  auto s = fifo_triple(Protocol::Mpcp);
  auto t = run(s, 100);
  for (auto& e : t.events) {
    if (e.kind == EventKind::CsAcquire && e.task == 2) e.priority = Priority{2};
  }
  EXPECT_FALSE(audit_ceiling_and_grant_order(t, s).empty());
}

TEST(Audit, DetectsPreemptedSpinOwner) {
  auto s = fifo_triple(Protocol::FmlpS);
  auto t = run(s, 100);
  auto acq = test::events_of(t, EventKind::CsAcquire, 1).at(0);
  Event fake = acq;
  fake.kind = EventKind::Preempt;
  fake.resource.reset();
  auto pos = std::find_if(t.events.begin(), t.events.end(),
                          [&](const Event& e) { return e.sequence == acq.sequence; });
  t.events.insert(pos + 1, fake);
  EXPECT_FALSE(audit_fifo(t, s).empty());
}

TEST(Audit, DetectsMissingMigrateBack) {
  auto s = test::load_example("examples/dpcp_trio.cfg");
  auto t = run(s, 500);
  EXPECT_TRUE(audit_locality(t, s).empty());
  std::erase_if(t.events, [](const Event& e) { return e.kind == EventKind::MigrateBack; });
  EXPECT_FALSE(audit_locality(t, s).empty());
}

TEST(Audit, DetectsAccountingDrift) {
  auto s = fifo_triple(Protocol::FmlpS);
  auto t = run(s, 100);
  EXPECT_TRUE(audit_conservation(t, s).empty());
  t.processors[0].idle += 1;
  EXPECT_FALSE(audit_conservation(t, s).empty());
}

TEST(Audit, DetectsIllegalOrder) {
  auto s = fifo_triple(Protocol::FmlpL);
  auto t = run(s, 100);
  EXPECT_TRUE(audit_event_legality(t).empty());
  std::erase_if(t.events, [](const Event& e) { return e.kind == EventKind::CsRequest && e.task == 3; });
  EXPECT_FALSE(audit_event_legality(t).empty());
}

TEST(Audit, DetectsNestedRequest) {
  Scenario s = fifo_triple(Protocol::FmlpL);
  s.resources.push_back({2, Priority{1}, std::nullopt});
  auto t = run(s, 100);
  // Re-label task 1's request of resource 1 as a second request on resource 2
  // made right after acquiring 1.
  auto acq = test::events_of(t, EventKind::CsAcquire, 1).at(0);
  Event nested = acq;
  nested.kind = EventKind::CsRequest;
  nested.resource = 2;
  nested.sequence = acq.sequence;  // same instant, sequence fixed up below
  auto pos = std::find_if(t.events.begin(), t.events.end(),
                          [&](const Event& e) { return e.sequence == acq.sequence; });
  pos = t.events.insert(pos + 1, nested);
  for (auto it = pos; it != t.events.end(); ++it) ++it->sequence;
  auto f = audit_event_legality(t);
  EXPECT_NE(std::find_if(f.begin(), f.end(),
                         [](const std::string& l) { return l.find("nested request") != std::string::npos; }),
            f.end());
}

}  // namespace
}  // namespace rtsim
