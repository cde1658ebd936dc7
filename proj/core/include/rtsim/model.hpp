#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtsim/time.hpp"

namespace rtsim {

using ProcessorId = std::uint32_t;
using TaskId = std::uint32_t;
using ResourceId = std::uint32_t;

/// Fixed priority level. Numerically smaller is more urgent. Level 0 is
/// reserved above every task priority (non-preemptive boosting); the parked
/// sentinel marks a scheduler node that is not a scheduling candidate.
class Priority {
 public:
  using Rep = std::uint32_t;

  constexpr Priority() = default;
  constexpr explicit Priority(Rep value) : value_(value) {}

  static constexpr Priority top() { return Priority{0}; }
  static constexpr Priority parked() { return Priority{std::numeric_limits<Rep>::max()}; }

  constexpr Rep value() const { return value_; }
  constexpr bool is_task_level() const { return value_ >= 1 && value_ != parked().value_; }

  constexpr bool more_urgent_than(Priority other) const { return value_ < other.value_; }

  friend constexpr bool operator==(Priority, Priority) = default;
  friend constexpr auto operator<=>(Priority, Priority) = default;

 private:
  Rep value_ = parked().value_;
};

constexpr Priority most_urgent(Priority a, Priority b) { return a.value() <= b.value() ? a : b; }

std::string to_string(Priority p);

enum class Protocol { Mpcp, Dpcp, FmlpL, FmlpS, Dflp };

inline constexpr Protocol kAllProtocols[] = {Protocol::Mpcp, Protocol::Dpcp, Protocol::FmlpL,
                                             Protocol::FmlpS, Protocol::Dflp};

std::string_view to_string(Protocol protocol);
/// Accepts "mpcp", "dpcp", "fmlp-l", "fmlp_l", "fmlp-s", "dflp" (any case).
std::optional<Protocol> parse_protocol(std::string_view text);

/// True for the protocols whose critical sections execute on a
/// synchronization processor reached by migration.
constexpr bool is_distributed(Protocol p) { return p == Protocol::Dpcp || p == Protocol::Dflp; }

/// True for the protocols whose ceiling is user-supplied and static.
constexpr bool uses_static_ceiling(Protocol p) { return p == Protocol::Mpcp || p == Protocol::Dpcp; }

enum class ProcessorRole { Application, Synchronization };

std::string_view to_string(ProcessorRole role);

struct OverheadModel {
  TimeNs lock = 0;
  TimeNs unlock = 0;
  TimeNs migrate_to = 0;
  TimeNs migrate_back = 0;
  TimeNs context_switch = 0;

  friend bool operator==(const OverheadModel&, const OverheadModel&) = default;
};

struct CriticalSectionSpec {
  ResourceId resource = 0;
  /// Execution time into the job, earlier sections included, at which this
  /// section starts.
  TimeNs offset = 0;
  TimeNs length = 0;

  TimeNs end() const { return offset + length; }

  friend bool operator==(const CriticalSectionSpec&, const CriticalSectionSpec&) = default;
};

struct TaskSpec {
  TaskId id = 0;
  TimeNs wcet = 0;
  TimeNs period = 0;
  TimeNs deadline = 0;
  Priority priority{1};
  std::vector<CriticalSectionSpec> critical_sections;
  ProcessorId home_processor = 0;

  TimeNs critical_work() const;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct ResourceSpec {
  ResourceId id = 0;
  std::optional<Priority> ceiling;
  std::optional<ProcessorId> sync_processor;

  friend bool operator==(const ResourceSpec&, const ResourceSpec&) = default;
};

struct SystemConfig {
  std::uint32_t processors = 1;
  std::vector<ProcessorRole> roles{ProcessorRole::Application};
  Protocol protocol = Protocol::Mpcp;
  OverheadModel overheads;

  bool is_synchronization(ProcessorId p) const;
  std::uint32_t synchronization_count() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

/// A complete simulation input: system, task set and resources.
struct Scenario {
  SystemConfig system;
  std::vector<TaskSpec> tasks;
  std::vector<ResourceSpec> resources;

  /// Index of the resource with the given id, if any.
  std::optional<std::size_t> resource_index(ResourceId id) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Violation {
  std::string subject;  // "system", "task 3", "resource 2"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool contains(std::string_view message) const;
  /// One violation per line, "subject: message"; "OK" when empty.
  std::string to_text() const;
};

/// Checks every structural invariant and collects all violations.
ValidationReport validate_config(const SystemConfig& config, const std::vector<TaskSpec>& tasks,
                                 const std::vector<ResourceSpec>& resources);

inline ValidationReport validate_config(const Scenario& scenario) {
  return validate_config(scenario.system, scenario.tasks, scenario.resources);
}

}  // namespace rtsim
