// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. All tolerances are exact (0 ns) unless stated.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rtsim/audit.hpp"
#include "rtsim/engine.hpp"
#include "rtsim/metrics.hpp"
#include "rtsim/oracle.hpp"
#include "rtsim/workload.hpp"

namespace {

using namespace rtsim;

constexpr TimeNs kRandomHorizonCap = 10 * kNsPerS;
constexpr std::uint64_t kSeeds = 1000;
constexpr std::uint64_t kOraclePerProtocol = 200;
constexpr TimeNs kOverheadMax = 200;  // per random overhead draw, ns
constexpr TimeNs kCtxMax = 50;

struct Criterion {
  int id;
  std::string name;
  std::size_t checked = 0;
  std::vector<std::string> failures;
  double seconds = 0;

  void note(const Findings& f, const std::string& where) {
    ++checked;
    for (const auto& line : f) {
      if (failures.size() < 5) failures.push_back(where + ": " + line);
      else if (failures.size() == 5) failures.emplace_back("...");
    }
  }
  void fail(const std::string& what) { note(Findings{what}, "check"); }

  // Runs one audit, charging its wall time to this criterion.
  template <class Audit>
  void audit(Audit&& fn, const std::string& where) {
    const auto start = std::chrono::steady_clock::now();
    Findings f = fn();
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    note(f, where);
  }
};

class Timer {
 public:
  explicit Timer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~Timer() {
    sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

std::string label(Protocol p, std::uint64_t seed) {
  return std::string(to_string(p)) + " seed " + std::to_string(seed);
}

// Protocol-specific property audits shared by every suite.
void audit_protocol(const Trace& t, const Scenario& s, const std::string& where, Criterion& c3,
                    Criterion& c4, Criterion& c5) {
  const auto p = s.system.protocol;
  if (p == Protocol::Mpcp) c3.audit([&] { return audit_ceiling_and_grant_order(t, s); }, where);
  if (p == Protocol::FmlpL || p == Protocol::FmlpS || p == Protocol::Dflp) {
    c4.audit([&] { return audit_fifo(t, s); }, where);
  }
  if (is_distributed(p)) c5.audit([&] { return audit_locality(t, s); }, where);
}

OverheadModel random_overheads(std::mt19937_64& gen) {
  std::uniform_int_distribution<TimeNs> o(0, kOverheadMax), ctx(0, kCtxMax);
  OverheadModel m;
  m.lock = o(gen);
  m.unlock = o(gen);
  m.migrate_to = o(gen);
  m.migrate_back = o(gen);
  m.context_switch = ctx(gen);
  return m;
}

Scenario one_section(Protocol protocol, OverheadModel o) {
  Scenario s;
  s.system.processors = 2;
  s.system.roles = {ProcessorRole::Application, ProcessorRole::Synchronization};
  s.system.protocol = protocol;
  s.system.overheads = o;
  s.resources.push_back({1, Priority{1}, 1});
  TaskSpec t;
  t.id = 1;
  t.wcet = 100'000;
  t.period = t.deadline = 1'000'000;
  t.priority = Priority{1};
  t.critical_sections.push_back({1, 40'000, 20'000});
  s.tasks.push_back(t);
  return s;
}

TimeNs response(const Trace& t) {
  for (const auto& j : t.jobs) {
    if (j.task == 1 && j.job == 0 && j.completion) return *j.completion - j.release;
  }
  return -1;
}

}  // namespace

int main() {
  Criterion c1{1, "mutual exclusion on random task sets"};
  Criterion c2{2, "engine equals step oracle on guarded instances"};
  Criterion c3{3, "MPCP ceiling priority and grant order"};
  Criterion c4{4, "FIFO grant order, no FMLP-S owner preemption"};
  Criterion c5{5, "DPCP/DFLP locality and migrations"};
  Criterion c6{6, "overhead inflation"};
  Criterion c7{7, "3 x 5 test application"};
  Criterion c8{8, "byte-identical events.csv"};
  Criterion c9{9, "time conservation and decomposition"};

  // 1: seeds 0..999, every protocol, default generator.
  {
    Timer timer(c1.seconds);
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      for (auto p : kAllProtocols) {
        GeneratorParams g;
        g.seed = seed;
        g.protocol = p;
        const auto s = generate_random_taskset(g);
        const TimeNs horizon = std::min(10 * hyperperiod(s, kRandomHorizonCap), kRandomHorizonCap);
        const auto t = run(s, horizon, seed);
        const auto where = label(p, seed);
        c1.note(audit_mutual_exclusion(t), where);
        c1.note(audit_event_legality(t), where);
        audit_protocol(t, s, where, c3, c4, c5);
        c9.audit([&] { return audit_conservation(t, s); }, where);
      }
    }
  }

  // 2: small instances inside the oracle guard, random overheads.
  {
    Timer timer(c2.seconds);
    const OracleGuard guard;
    for (auto p : kAllProtocols) {
      std::mt19937_64 gen(0x5eed + static_cast<unsigned>(p));
      for (std::uint64_t seed = 0; seed < kOraclePerProtocol; ++seed) {
        GeneratorParams g;
        g.seed = seed;
        g.protocol = p;
        g.processors = 3;
        g.tasks = 4;
        g.resources = 2;
        g.utilization = 1.5;
        g.period_min = 1000;
        g.period_max = 20'000;
        g.granularity = 100;
        auto s = generate_random_taskset(g);
        s.system.overheads = random_overheads(gen);
        const TimeNs horizon = guard.max_horizon;
        const auto engine = run(s, horizon, seed);
        const auto oracle = step_oracle(s, horizon, guard);
        const auto where = label(p, seed);
        const auto diff = diff_traces(engine, oracle);
        c2.note(diff.empty() ? Findings{} : Findings{diff}, where);
        audit_protocol(engine, s, where, c3, c4, c5);
        c9.audit([&] { return audit_conservation(engine, s); }, where);
      }
    }
  }

  // 6: one job, one section, isolated overhead effect.
  {
    Timer timer(c6.seconds);
    OverheadModel mrsp;
    mrsp.lock = 5376;
    mrsp.unlock = 5514;
    for (auto p : {Protocol::Mpcp, Protocol::FmlpL, Protocol::FmlpS}) {
      const auto base = run(one_section(p, {}), 1'000'000);
      const auto with = run(one_section(p, mrsp), 1'000'000);
      const TimeNs d = response(with) - response(base);
      if (d != 10'890) c6.fail(std::string(to_string(p)) + " inflation " + std::to_string(d) + " != 10890");
      else c6.note({}, "");
      c9.audit([&] { return audit_conservation(with, one_section(p, mrsp)); }, std::string(to_string(p)));
    }
    OverheadModel dist;
    dist.lock = 3000;
    dist.unlock = 3000;
    dist.migrate_to = 2000;
    dist.migrate_back = 7000;
    for (auto p : {Protocol::Dpcp, Protocol::Dflp}) {
      const auto s = one_section(p, dist);
      const auto base = run(one_section(p, {}), 1'000'000);
      const auto with = run(s, 1'000'000);
      const TimeNs want = dist.migrate_to + dist.migrate_back + dist.lock + dist.unlock;
      const TimeNs d = response(with) - response(base);
      if (d != want) {
        c6.fail(std::string(to_string(p)) + " inflation " + std::to_string(d) + " != " + std::to_string(want));
      } else {
        c6.note({}, "");
      }
      c9.audit([&] { return audit_conservation(with, s); }, std::string(to_string(p)));

      Table1Params tp;
      tp.protocol = p;
      tp.overheads = dist;
      const auto ts = build_table1_scenario(tp);
      const auto stats = summarize(run(ts, 100 * kNsPerMs), ts);
      const auto& lp = stats.populations.at("lock_path");
      const auto& up = stats.populations.at("unlock_path");
      auto by_value = [](const Sample& a, const Sample& b) { return a.value < b.value; };
      if (lp.empty() || up.empty() ||
          std::min_element(up.begin(), up.end(), by_value)->value <=
              std::max_element(lp.begin(), lp.end(), by_value)->value) {
        c6.fail(std::string(to_string(p)) + " unlock_path not above lock_path with mig_bk > mig_to");
      } else {
        c6.note({}, "");
      }
    }
  }

  // 7: the 3 x 5 application under every protocol, ten hyperperiods; slice against the oracle.
  {
    Timer timer(c7.seconds);
    for (auto p : kAllProtocols) {
      Table1Params tp;
      tp.protocol = p;
      const auto s = build_table1_scenario(tp);
      const auto report = validate_config(s);
      if (!report.ok()) {
        c7.fail(std::string(to_string(p)) + " invalid: " + report.to_text());
        continue;
      }
      const TimeNs h = hyperperiod(s, 10 * kNsPerS);
      if (h != 100 * kNsPerMs) c7.fail("hyperperiod " + std::to_string(h) + " != 100ms");
      const auto t = run(s, 10 * h);
      const auto stats = summarize(t, s);
      if (stats.misses != 0) c7.fail(std::string(to_string(p)) + ": " + std::to_string(stats.misses) + " misses");
      else c7.note({}, std::string(to_string(p)));
      const auto where = "table1 " + std::string(to_string(p));
      c1.note(audit_mutual_exclusion(t), where);
      audit_protocol(t, s, where, c3, c4, c5);
      c9.audit([&] { return audit_conservation(t, s); }, where);

      Table1Params sp = tp;
      sp.unit_ns = 100;
      const auto slice = build_table1_slice(sp);
      const TimeNs sh = OracleGuard{}.max_horizon;
      const auto diff = diff_traces(run(slice, sh), step_oracle(slice, sh));
      c7.note(diff.empty() ? Findings{} : Findings{diff}, "slice " + std::string(to_string(p)));
    }
  }

  // 8: repeated runs serialize identically.
  {
    Timer timer(c8.seconds);
    for (auto p : kAllProtocols) {
      Table1Params tp;
      tp.protocol = p;
      tp.overheads = {100, 200, 300, 400, 50};
      const auto s = build_table1_scenario(tp);
      const auto a = events_csv(run(s, kNsPerS, 42));
      const auto b = events_csv(run(s, kNsPerS, 42));
      if (a != b) c8.fail(std::string(to_string(p)) + " events.csv differs between runs");
      else c8.note({}, "");
    }
  }

  int failed = 0;
  for (Criterion* c : {&c1, &c2, &c3, &c4, &c5, &c6, &c7, &c8, &c9}) {
    const bool ok = c->failures.empty() && c->checked > 0;
    failed += ok ? 0 : 1;
    std::printf("%s %d %s: %zu checks, %zu findings, tolerance 0 ns [%.1f s]\n", ok ? "PASS" : "FAIL", c->id,
                c->name.c_str(), c->checked, c->failures.size(), c->seconds);
    for (const auto& f : c->failures) std::printf("    %s\n", f.c_str());
  }
  return failed == 0 ? 0 : 1;
}
