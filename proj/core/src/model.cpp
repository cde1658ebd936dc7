#include "rtsim/model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace rtsim {

std::string to_string(Priority p) {
  if (p == Priority::parked()) return "parked";
  return std::to_string(p.value());
}

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::Mpcp: return "mpcp";
    case Protocol::Dpcp: return "dpcp";
    case Protocol::FmlpL: return "fmlp-l";
    case Protocol::FmlpS: return "fmlp-s";
    case Protocol::Dflp: return "dflp";
  }
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
  std::string key;
  for (char c : text) {
    key.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (Protocol p : kAllProtocols) {
    if (to_string(p) == key) return p;
  }
  return std::nullopt;
}

std::string_view to_string(ProcessorRole role) {
  return role == ProcessorRole::Application ? "app" : "sync";
}

TimeNs TaskSpec::critical_work() const {
  TimeNs sum = 0;
  for (const auto& cs : critical_sections) sum += cs.length;
  return sum;
}

bool SystemConfig::is_synchronization(ProcessorId p) const {
  return p < roles.size() && roles[p] == ProcessorRole::Synchronization;
}

std::uint32_t SystemConfig::synchronization_count() const {
  return static_cast<std::uint32_t>(
      std::count(roles.begin(), roles.end(), ProcessorRole::Synchronization));
}

std::optional<std::size_t> Scenario::resource_index(ResourceId id) const {
  for (std::size_t i = 0; i < resources.size(); ++i) {
    if (resources[i].id == id) return i;
  }
  return std::nullopt;
}

bool ValidationReport::contains(std::string_view message) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) {
    return v.message.find(message) != std::string::npos;
  });
}

std::string ValidationReport::to_text() const {
  if (ok()) return "OK\n";
  std::ostringstream out;
  for (const auto& v : violations) out << v.subject << ": " << v.message << '\n';
  return out.str();
}

namespace {

class Collector {
 public:
  explicit Collector(ValidationReport& report) : report_(report) {}
  void add(std::string subject, std::string message) {
    report_.violations.push_back({std::move(subject), std::move(message)});
  }

 private:
  ValidationReport& report_;
};

std::string task_subject(const TaskSpec& t) { return "task " + std::to_string(t.id); }
std::string resource_subject(const ResourceSpec& r) { return "resource " + std::to_string(r.id); }

void check_system(const SystemConfig& config, Collector& out) {
  if (config.processors == 0) out.add("system", "processor count must be at least 1");
  if (config.roles.size() != config.processors) {
    out.add("system", "role list has " + std::to_string(config.roles.size()) +
                          " entries for " + std::to_string(config.processors) + " processors");
  }
  if (is_distributed(config.protocol) && config.synchronization_count() == 0) {
    out.add("system", std::string(to_string(config.protocol)) +
                          " requires at least one synchronization processor");
  }
  const auto& o = config.overheads;
  for (auto [name, v] : {std::pair{"lock", o.lock}, {"unlock", o.unlock},
                         {"migrate_to", o.migrate_to}, {"migrate_back", o.migrate_back},
                         {"context_switch", o.context_switch}}) {
    if (v < 0) out.add("system", std::string("overhead ") + name + " is negative");
  }
}

void check_resources(const SystemConfig& config, const std::vector<ResourceSpec>& resources,
                     Collector& out) {
  std::set<ResourceId> seen;
  for (const auto& r : resources) {
    if (!seen.insert(r.id).second) out.add(resource_subject(r), "duplicate resource id");
    if (r.ceiling && !r.ceiling->is_task_level()) {
      out.add(resource_subject(r), "ceiling must be a task priority level (>= 1)");
    }
    if (uses_static_ceiling(config.protocol) && !r.ceiling) {
      out.add(resource_subject(r), std::string(to_string(config.protocol)) + " requires a ceiling");
    }
    if (is_distributed(config.protocol)) {
      if (!r.sync_processor) {
        out.add(resource_subject(r), "no synchronization processor assigned");
      } else if (!config.is_synchronization(*r.sync_processor)) {
        out.add(resource_subject(r), "sync_processor " + std::to_string(*r.sync_processor) +
                                         " is not a synchronization processor");
      }
    } else if (r.sync_processor && *r.sync_processor >= config.processors) {
      out.add(resource_subject(r), "sync_processor out of range");
    }
  }
}

void check_tasks(const SystemConfig& config, const std::vector<TaskSpec>& tasks,
                 const std::vector<ResourceSpec>& resources, Collector& out) {
  std::set<TaskId> seen;
  std::map<ResourceId, const ResourceSpec*> by_id;
  for (const auto& r : resources) by_id.emplace(r.id, &r);

  for (const auto& t : tasks) {
    const auto who = task_subject(t);
    if (!seen.insert(t.id).second) out.add(who, "duplicate task id");
    if (t.wcet <= 0) out.add(who, "wcet must be positive");
    if (t.period <= 0) out.add(who, "period must be positive");
    if (t.deadline <= 0) out.add(who, "deadline must be positive");
    if (t.deadline > t.period) out.add(who, "deadline exceeds period");
    if (!t.priority.is_task_level()) out.add(who, "priority must be >= 1 (level 0 is reserved)");
    if (t.home_processor >= config.processors) {
      out.add(who, "home processor " + std::to_string(t.home_processor) + " out of range");
    } else if (config.is_synchronization(t.home_processor)) {
      out.add(who, "home processor " + std::to_string(t.home_processor) +
                       " is not an application processor");
    }

    TimeNs cursor = 0;
    for (std::size_t k = 0; k < t.critical_sections.size(); ++k) {
      const auto& cs = t.critical_sections[k];
      const auto where = who + " cs " + std::to_string(k);
      if (!by_id.contains(cs.resource)) {
        out.add(where, "unknown resource " + std::to_string(cs.resource));
      }
      if (cs.length <= 0) out.add(where, "critical section length must be positive");
      if (cs.offset < cursor) out.add(where, "critical sections overlap or are out of order");
      cursor = std::max(cursor, cs.end());
    }
    if (cursor > t.wcet) out.add(who, "critical sections exceed wcet");

    if (uses_static_ceiling(config.protocol)) {
      for (const auto& cs : t.critical_sections) {
        auto it = by_id.find(cs.resource);
        if (it == by_id.end() || !it->second->ceiling) continue;
        if (t.priority.more_urgent_than(*it->second->ceiling)) {
          out.add(resource_subject(*it->second),
                  "ceiling " + to_string(*it->second->ceiling) + " is less urgent than user " +
                      who + " priority " + to_string(t.priority));
        }
      }
    }
  }
}

}  // namespace

ValidationReport validate_config(const SystemConfig& config, const std::vector<TaskSpec>& tasks,
                                 const std::vector<ResourceSpec>& resources) {
  ValidationReport report;
  Collector out(report);
  check_system(config, out);
  check_resources(config, resources, out);
  check_tasks(config, tasks, resources, out);
  return report;
}

}  // namespace rtsim
