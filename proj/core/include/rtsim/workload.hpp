#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "rtsim/model.hpp"

namespace rtsim {

/// Priority levels of the five-task ladder used on each application
/// processor, most urgent first.
enum class Level { H, MH, M, ML, L };

inline constexpr std::array<Level, 5> kLevels{Level::H, Level::MH, Level::M, Level::ML, Level::L};

std::string_view to_string(Level level);

/// Parameters of the 3 x 5 test application. Per-level values are in
/// units of `unit_ns` and indexed by Level.
struct Table1Params {
  Protocol protocol = Protocol::Mpcp;
  TimeNs unit_ns = 100'000;
  std::array<TimeNs, 5> period_units{100, 200, 250, 500, 1000};
  std::array<TimeNs, 5> wcet_units{10, 20, 20, 40, 50};
  /// Critical-section length, uniform across levels.
  TimeNs cs_units = 5;
  OverheadModel overheads;
};

/// Resource requested by the task at (cpu, level); resources are 1..3.
ResourceId table1_resource(std::uint32_t cpu, Level level);

/// Task id and base priority of (cpu, level): 5 * cpu + rank, rank 1 for H.
TaskId table1_task_id(std::uint32_t cpu, Level level);

/// Fifteen tasks on application processors 0-2, three resources, processor
/// 3 reserved for synchronization. Under the local protocols processor 3
/// is an (idle) application processor. Ceilings are the most urgent user
/// priority; sync_processor is 3 under the distributed protocols.
Scenario build_table1_scenario(const Table1Params& params = {});

/// Reduced slice for oracle checks: processor 0 runs {ML->s2, M->s3},
/// processor 1 runs {L->s2, ML->s3}, processor 2 is the synchronization
/// processor. Same per-level parameters and priorities as the full table.
Scenario build_table1_slice(const Table1Params& params);

/// Hyperperiod of a task set, saturating at `cap`.
TimeNs hyperperiod(const Scenario& scenario, TimeNs cap);

/// Bad generator parameters, or no feasible task set within the retry bound.
class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorParams {
  std::uint64_t seed = 0;
  std::uint32_t processors = 4;  // M, including the synchronization processor
  std::uint32_t tasks = 8;       // n
  std::uint32_t resources = 2;   // Z
  double utilization = 1.0;      // total over the application processors
  double cs_ratio_min = 0.05;
  double cs_ratio_max = 0.25;
  TimeNs period_min = 10 * kNsPerMs;
  TimeNs period_max = 1000 * kNsPerMs;
  TimeNs granularity = kNsPerMs;  // periods are multiples of this
  Protocol protocol = Protocol::Mpcp;
  std::uint32_t max_retries = 1000;
};

// Generation method:
//  * utilizations: UUniFast over n tasks summing to `utilization`, redrawn
//    whenever any share exceeds 1 (UUniFast-discard);
//  * periods: log-uniform on [period_min, period_max], rounded down to a
//    multiple of `granularity` (at least one granule); D = T;
//  * C = max(1, round(u * T));
//  * 0-2 critical sections per task on uniformly chosen resources, each of
//    length ratio * C with ratio uniform in [cs_ratio_min, cs_ratio_max]
//    (at least 1 ns), offsets placed uniformly in the remaining slack;
//  * partitioning: worst-fit decreasing utilization over the application
//    processors; priorities rate monotonic and globally unique (ties by
//    task index); ceilings are the most urgent user priority, 1 for an
//    unused resource.
// Under DPCP/DFLP the last processor is the synchronization processor.
// A draw that cannot fit its sections into C is discarded; after
// `max_retries` discarded draws GeneratorError is thrown.
Scenario generate_random_taskset(const GeneratorParams& params);

/// Copy of `scenario` under another protocol. Local protocols get all
/// application processors and no sync placement. Distributed protocols keep
/// existing synchronization processors or promote the highest-numbered
/// processor without tasks; resources lacking a valid placement go to the
/// first synchronization processor. Missing ceilings become the most urgent
/// user priority; given ceilings are kept.
Scenario with_protocol(Scenario scenario, Protocol protocol);

}  // namespace rtsim
