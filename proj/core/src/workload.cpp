#include "rtsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace rtsim {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::H: return "H";
    case Level::MH: return "MH";
    case Level::M: return "M";
    case Level::ML: return "ML";
    case Level::L: return "L";
  }
  return "?";
}

namespace {

constexpr std::uint32_t kTableCpus = 3;

// kRotation[cpu][level]
constexpr ResourceId kRotation[kTableCpus][5] = {
    {3, 2, 3, 2, 1},
    {1, 3, 1, 3, 2},
    {2, 1, 2, 1, 3},
};

std::size_t rank(Level level) { return static_cast<std::size_t>(level); }

TaskSpec table1_task(const Table1Params& p, std::uint32_t cpu, Level level) {
  const auto r = rank(level);
  TaskSpec t;
  t.id = table1_task_id(cpu, level);
  t.priority = Priority{t.id};
  t.period = p.period_units[r] * p.unit_ns;
  t.deadline = t.period;
  t.wcet = p.wcet_units[r] * p.unit_ns;
  t.home_processor = cpu;
  const TimeNs offset_units = (p.wcet_units[r] - p.cs_units) / 2;
  t.critical_sections.push_back(
      {table1_resource(cpu, level), offset_units * p.unit_ns, p.cs_units * p.unit_ns});
  return t;
}

void assign_ceilings(Scenario& s) {
  for (auto& r : s.resources) {
    Priority ceiling{1};
    bool used = false;
    for (const auto& t : s.tasks) {
      for (const auto& cs : t.critical_sections) {
        if (cs.resource != r.id) continue;
        ceiling = used ? most_urgent(ceiling, t.priority) : t.priority;
        used = true;
      }
    }
    r.ceiling = ceiling;
  }
}

// Roles and placement for `count` processors, the last one synchronization
// under a distributed protocol.
void set_roles(Scenario& s, std::uint32_t count) {
  s.system.processors = count;
  s.system.roles.assign(count, ProcessorRole::Application);
  const bool distributed = is_distributed(s.system.protocol);
  if (distributed) s.system.roles.back() = ProcessorRole::Synchronization;
  for (auto& r : s.resources) {
    r.sync_processor = distributed ? std::optional<ProcessorId>(count - 1) : std::nullopt;
  }
}

}  // namespace

ResourceId table1_resource(std::uint32_t cpu, Level level) { return kRotation[cpu][rank(level)]; }

TaskId table1_task_id(std::uint32_t cpu, Level level) {
  return static_cast<TaskId>(5 * cpu + rank(level) + 1);
}

Scenario build_table1_scenario(const Table1Params& params) {
  Scenario s;
  s.system.protocol = params.protocol;
  s.system.overheads = params.overheads;
  for (ResourceId id = 1; id <= 3; ++id) s.resources.push_back({id, std::nullopt, std::nullopt});
  for (std::uint32_t cpu = 0; cpu < kTableCpus; ++cpu) {
    for (auto level : kLevels) s.tasks.push_back(table1_task(params, cpu, level));
  }
  set_roles(s, kTableCpus + 1);
  assign_ceilings(s);
  return s;
}

Scenario build_table1_slice(const Table1Params& params) {
  Scenario s;
  s.system.protocol = params.protocol;
  s.system.overheads = params.overheads;
  s.resources.push_back({2, std::nullopt, std::nullopt});
  s.resources.push_back({3, std::nullopt, std::nullopt});
  s.tasks.push_back(table1_task(params, 0, Level::M));
  s.tasks.push_back(table1_task(params, 0, Level::ML));
  s.tasks.push_back(table1_task(params, 1, Level::ML));
  s.tasks.push_back(table1_task(params, 1, Level::L));
  set_roles(s, 3);
  assign_ceilings(s);
  return s;
}

TimeNs hyperperiod(const Scenario& scenario, TimeNs cap) {
  TimeNs h = 1;
  for (const auto& t : scenario.tasks) h = lcm_capped(h, t.period, cap);
  return h;
}

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : gen_(seed) {}

  // [0, 1) with 53 random bits; avoids implementation-defined distributions
  // so output is identical across standard libraries.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double between(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(unit() * n); }

 private:
  std::mt19937_64 gen_;
};

std::vector<double> uunifast(Draw& draw, std::uint32_t n, double total) {
  std::vector<double> u(n);
  double sum = total;
  for (std::uint32_t i = 0; i + 1 < n; ++i) {
    const double next = sum * std::pow(draw.unit(), 1.0 / static_cast<double>(n - 1 - i));
    u[i] = sum - next;
    sum = next;
  }
  u[n - 1] = sum;
  return u;
}

std::optional<std::vector<CriticalSectionSpec>> draw_sections(Draw& draw, const GeneratorParams& p,
                                                              TimeNs wcet) {
  const auto count = draw.below(3);
  std::vector<TimeNs> lengths;
  std::vector<ResourceId> which;
  TimeNs total = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    const double ratio = draw.between(p.cs_ratio_min, p.cs_ratio_max);
    const auto len = std::max<TimeNs>(1, std::llround(ratio * static_cast<double>(wcet)));
    lengths.push_back(len);
    which.push_back(static_cast<ResourceId>(draw.below(p.resources) + 1));
    total += len;
  }
  if (total > wcet) return std::nullopt;
  // Split the slack into count + 1 gaps at sorted random cut points.
  const TimeNs slack = wcet - total;
  std::vector<TimeNs> cuts;
  for (std::uint64_t k = 0; k < count; ++k) {
    cuts.push_back(static_cast<TimeNs>(draw.below(static_cast<std::uint64_t>(slack) + 1)));
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<CriticalSectionSpec> out;
  TimeNs placed = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    out.push_back({which[k], cuts[k] + placed, lengths[k]});
    placed += lengths[k];
  }
  return out;
}

}  // namespace

Scenario generate_random_taskset(const GeneratorParams& p) {
  const bool distributed = is_distributed(p.protocol);
  const std::uint32_t app = p.processors - (distributed ? 1 : 0);
  if (p.processors < 1 || p.tasks < p.processors) {
    throw GeneratorError("generator requires n >= M >= 1");
  }
  if (app < 1) throw GeneratorError("distributed protocols need at least two processors");
  if (p.resources < 1) throw GeneratorError("generator requires Z >= 1");
  if (!(p.utilization > 0.0) || p.utilization > static_cast<double>(app)) {
    throw GeneratorError("utilization target must lie in (0, application processors]");
  }
  if (!(p.cs_ratio_min > 0.0) || p.cs_ratio_max < p.cs_ratio_min || p.cs_ratio_max > 1.0) {
    throw GeneratorError("cs ratio range must satisfy 0 < min <= max <= 1");
  }
  if (p.granularity <= 0 || p.period_min < p.granularity || p.period_max < p.period_min) {
    throw GeneratorError("period range must satisfy granularity <= min <= max");
  }

  Draw draw(p.seed);
  for (std::uint32_t attempt = 0; attempt <= p.max_retries; ++attempt) {
    auto u = uunifast(draw, p.tasks, p.utilization);
    if (std::any_of(u.begin(), u.end(), [](double x) { return x > 1.0; })) continue;

    Scenario s;
    s.system.protocol = p.protocol;
    bool feasible = true;
    const double lmin = std::log(static_cast<double>(p.period_min));
    const double lmax = std::log(static_cast<double>(p.period_max));
    for (std::uint32_t i = 0; i < p.tasks && feasible; ++i) {
      TaskSpec t;
      t.id = i + 1;
      const auto raw = static_cast<TimeNs>(std::exp(draw.between(lmin, lmax)));
      t.period = std::max(p.granularity, raw / p.granularity * p.granularity);
      t.deadline = t.period;
      t.wcet = std::clamp<TimeNs>(std::llround(u[i] * static_cast<double>(t.period)), 1, t.period);
      auto sections = draw_sections(draw, p, t.wcet);
      if (!sections) {
        feasible = false;
        break;
      }
      t.critical_sections = std::move(*sections);
      s.tasks.push_back(std::move(t));
    }
    if (!feasible) continue;

    for (ResourceId id = 1; id <= p.resources; ++id) {
      s.resources.push_back({id, std::nullopt, std::nullopt});
    }

    // Rate-monotonic, unique.
    std::vector<std::size_t> order(s.tasks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return s.tasks[a].period < s.tasks[b].period;
    });
    for (std::size_t r = 0; r < order.size(); ++r) {
      s.tasks[order[r]].priority = Priority{static_cast<Priority::Rep>(r + 1)};
    }

    // Worst-fit decreasing utilization.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return u[a] > u[b];
    });
    std::vector<double> load(app, 0.0);
    for (auto i : order) {
      const auto target = static_cast<std::uint32_t>(
          std::min_element(load.begin(), load.end()) - load.begin());
      s.tasks[i].home_processor = target;
      load[target] += u[i];
    }

    set_roles(s, p.processors);
    assign_ceilings(s);
    return s;
  }
  throw GeneratorError("no feasible task set after " + std::to_string(p.max_retries) +
                       " retries (seed " + std::to_string(p.seed) + ")");
}

Scenario with_protocol(Scenario scenario, Protocol protocol) {
  scenario.system.protocol = protocol;
  auto& roles = scenario.system.roles;
  roles.resize(scenario.system.processors, ProcessorRole::Application);
  if (!is_distributed(protocol)) {
    std::fill(roles.begin(), roles.end(), ProcessorRole::Application);
  } else if (scenario.system.synchronization_count() == 0) {
    for (ProcessorId p = scenario.system.processors; p-- > 0;) {
      const bool hosts = std::any_of(scenario.tasks.begin(), scenario.tasks.end(),
                                     [&](const TaskSpec& t) { return t.home_processor == p; });
      if (!hosts) {
        roles[p] = ProcessorRole::Synchronization;
        break;
      }
    }
  }
  std::optional<ProcessorId> first_sync;
  for (ProcessorId p = 0; p < roles.size(); ++p) {
    if (roles[p] == ProcessorRole::Synchronization) {
      first_sync = p;
      break;
    }
  }
  for (auto& r : scenario.resources) {
    if (!is_distributed(protocol)) {
      r.sync_processor.reset();
    } else if (!r.sync_processor || !scenario.system.is_synchronization(*r.sync_processor)) {
      r.sync_processor = first_sync;
    }
  }
  const auto given = scenario.resources;
  assign_ceilings(scenario);
  for (std::size_t k = 0; k < given.size(); ++k) {
    if (given[k].ceiling) scenario.resources[k].ceiling = given[k].ceiling;
  }
  return scenario;
}

}  // namespace rtsim
