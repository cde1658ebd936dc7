#include "rtsim_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include "rtsim/audit.hpp"
#include "rtsim/config_io.hpp"
#include "rtsim/engine.hpp"
#include "rtsim/metrics.hpp"
#include "rtsim/oracle.hpp"
#include "rtsim/workload.hpp"

namespace rtsim::cli {

namespace fs = std::filesystem;

namespace {

// Carries an exit code out of nested helpers.
struct Failure {
  int code;
  std::string message;
};

constexpr TimeNs kDefaultHorizonCap = 10 * kNsPerS;

struct RunOptions {
  std::string config;
  std::string protocol;
  std::string horizon;
  std::uint64_t seed = 0;
  std::string overheads;
  std::string out = ".";
  bool verify_guard = false;
  std::string mutate;
};

Protocol protocol_or_fail(const std::string& text) {
  auto p = parse_protocol(text);
  if (!p) throw Failure{kUsage, "unknown protocol '" + text + "'"};
  return *p;
}

Scenario load_or_fail(const std::string& path) {
  try {
    return load_scenario(path);
  } catch (const ConfigError& e) {
    throw Failure{kInvalidConfig, e.what()};
  } catch (const std::exception& e) {
    throw Failure{kUsage, e.what()};
  }
}

OverheadModel overheads_or_fail(const std::string& path) {
  try {
    return load_overheads(path);
  } catch (const ConfigError& e) {
    throw Failure{kInvalidConfig, e.what()};
  } catch (const std::exception& e) {
    throw Failure{kUsage, e.what()};
  }
}

void validate_or_fail(const Scenario& s) {
  auto report = validate_config(s);
  if (!report.ok()) throw Failure{kInvalidConfig, "invalid configuration:\n" + report.to_text()};
}

TimeNs duration_or_fail(const std::string& text, const char* what) {
  try {
    return parse_duration(text);
  } catch (const std::invalid_argument& e) {
    throw Failure{kUsage, std::string(what) + ": " + e.what()};
  }
}

// Explicit horizon, or 10 hyperperiods bounded by `cap`.
TimeNs horizon_for(const Scenario& s, const std::string& text, TimeNs cap) {
  if (!text.empty()) {
    const auto h = duration_or_fail(text, "--horizon");
    if (h <= 0) throw Failure{kUsage, "--horizon must be positive"};
    return h;
  }
  const auto h = hyperperiod(s, cap);
  return std::min(cap, h > cap / 10 ? cap : 10 * h);
}

Scenario prepare(const RunOptions& o, std::optional<Protocol> protocol,
                 const std::string& overheads) {
  auto s = load_or_fail(o.config);
  if (protocol) s = with_protocol(std::move(s), *protocol);
  if (!overheads.empty()) s.system.overheads = overheads_or_fail(overheads);
  validate_or_fail(s);
  return s;
}

std::string tail_of(const Trace& t) {
  std::ostringstream out;
  const auto& ev = t.events;
  const std::size_t from = ev.size() > 10 ? ev.size() - 10 : 0;
  out << "last events before the fault:\n";
  Trace tail;
  tail.events.assign(ev.begin() + static_cast<std::ptrdiff_t>(from), ev.end());
  out << events_csv(tail);
  return out.str();
}

Trace simulate_or_fail(const Scenario& s, TimeNs horizon, std::uint64_t seed,
                       const EngineOptions& options = {}) {
  try {
    return run(s, horizon, seed, options);
  } catch (const SimulationError& e) {
    throw Failure{kInternal, std::string("internal fault: ") + e.what() + "\n" +
                                 tail_of(e.partial_trace())};
  }
}

void write_or_fail(const fs::path& path, const std::string& text) {
  try {
    export_csv(path, text);
  } catch (const std::exception& e) {
    throw Failure{kUsage, e.what()};
  }
}

void make_dir_or_fail(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kUsage, "cannot create " + dir.string() + ": " + ec.message()};
}

// Oracle cross-check for --verify-guard and verify.
void cross_check(const Scenario& s, TimeNs horizon, const Trace& engine) {
  if (auto why = guard_violation(s, horizon); !why.empty()) {
    throw Failure{kGuard, "oracle guard exceeded: " + why};
  }
  const auto oracle = step_oracle(s, horizon);
  if (auto diff = diff_traces(engine, oracle); !diff.empty()) {
    throw Failure{kMismatch, "engine and oracle disagree: " + diff};
  }
}

struct CellResult {
  int code = kOk;
  std::string message;
  std::optional<ProtocolStats> stats;
};

CellResult run_cell(const RunOptions& o, std::optional<Protocol> protocol,
                    const std::string& overheads, const fs::path& dir) {
  CellResult r;
  try {
    const auto s = prepare(o, protocol, overheads);
    const auto horizon = horizon_for(s, o.horizon, kDefaultHorizonCap);
    const auto trace = simulate_or_fail(s, horizon, o.seed);
    auto stats = summarize(trace, s);
    make_dir_or_fail(dir);
    write_or_fail(dir / "events.csv", events_csv(trace));
    write_or_fail(dir / "summary.csv", summary_csv(stats));
    write_or_fail(dir / "samples.csv", samples_csv(stats));
    if (o.verify_guard) cross_check(s, horizon, trace);
    r.stats = std::move(stats);
  } catch (const Failure& f) {
    r.code = f.code;
    r.message = f.message;
  }
  return r;
}

void add_common(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "Scenario file")->required();
  cmd->add_option("--horizon", o.horizon,
                  "Simulated time, e.g. 1s or 500us (default: 10 hyperperiods, at most 10s)");
  cmd->add_option("--seed", o.seed, "Run seed (recorded in the trace fingerprint)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_flag("--verify-guard", o.verify_guard,
                "Also cross-check each run against the step oracle; fails with 4 when the "
                "instance exceeds the oracle guard and 5 on a mismatch");
}

int report(const Failure& f, std::ostream& err) {
  err << "error: " << f.message;
  if (f.message.empty() || f.message.back() != '\n') err << '\n';
  return f.code;
}

unsigned sweep_threads(std::size_t cells) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RTSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string population_avg(const ProtocolStats& s, std::string_view name) {
  auto it = s.populations.find(name);
  if (it == s.populations.end() || it->second.empty()) return {};
  std::vector<TimeNs> v;
  for (const auto& x : it->second) v.push_back(x.value);
  return fixed3(describe(v).avg);
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  std::optional<Protocol> protocol;
  try {
    if (!o.protocol.empty()) protocol = protocol_or_fail(o.protocol);
  } catch (const Failure& f) {
    return report(f, err);
  }
  auto r = run_cell(o, protocol, o.overheads, o.out);
  if (r.code != kOk) return report({r.code, r.message}, err);
  out << "wrote " << (fs::path(o.out) / "events.csv").string() << ", summary.csv, samples.csv: "
      << r.stats->completed << " jobs completed, " << r.stats->censored << " censored, "
      << r.stats->misses << " deadline misses\n";
  return kOk;
}

int cmd_sweep(const RunOptions& o, const std::vector<std::string>& protocols,
              const std::vector<std::string>& overhead_files, std::ostream& out,
              std::ostream& err) {
  std::vector<Protocol> ps;
  try {
    for (const auto& p : protocols) {
      if (p == "all") {
        ps.insert(ps.end(), std::begin(kAllProtocols), std::end(kAllProtocols));
      } else {
        ps.push_back(protocol_or_fail(p));
      }
    }
  } catch (const Failure& f) {
    return report(f, err);
  }
  if (ps.empty()) return report({kUsage, "sweep needs at least one protocol"}, err);

  struct Cell {
    Protocol protocol;
    std::string overheads;
    std::string label;
    CellResult result;
  };
  std::vector<Cell> cells;
  const std::vector<std::string> files =
      overhead_files.empty() ? std::vector<std::string>{""} : overhead_files;
  for (auto p : ps) {
    for (const auto& f : files) {
      Cell c{p, f, std::string(to_string(p)), {}};
      if (!f.empty()) c.label += "__" + fs::path(f).stem().string();
      cells.push_back(std::move(c));
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      auto& c = cells[i];
      c.result = run_cell(o, c.protocol, c.overheads, fs::path(o.out) / c.label);
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto n = sweep_threads(cells.size());
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  }

  std::string combined =
      "protocol,overheads,status,jobs,censored,rt_min,rt_avg,rt_max,blocking_total,migrations,"
      "misses,lock_path_avg,unlock_path_avg\n";
  int code = kOk;
  for (const auto& c : cells) {
    const std::string oh = c.overheads.empty() ? "" : fs::path(c.overheads).stem().string();
    combined += std::string(to_string(c.protocol)) + ',' + oh + ',';
    if (c.result.code != kOk) {
      err << "cell " << c.label << " failed (exit " << c.result.code << "): " << c.result.message;
      if (c.result.message.empty() || c.result.message.back() != '\n') err << '\n';
      if (code == kOk) code = c.result.code;
      combined += "error " + std::to_string(c.result.code) + ",,,,,,,,,,\n";
      continue;
    }
    const auto& s = *c.result.stats;
    TimeNs blocking = 0;
    std::uint64_t migrations = 0;
    for (const auto& t : s.tasks) {
      blocking += t.blocking_total;
      migrations += t.migrations;
    }
    combined += "ok," + std::to_string(s.completed) + ',' + std::to_string(s.censored) + ',';
    if (s.response.count > 0) {
      combined += std::to_string(s.response.min) + ',' + fixed3(s.response.avg) + ',' +
                  std::to_string(s.response.max);
    } else {
      combined += ",,";
    }
    combined += ',' + std::to_string(blocking) + ',' + std::to_string(migrations) + ',' +
                std::to_string(s.misses) + ',' + population_avg(s, "lock_path") + ',' +
                population_avg(s, "unlock_path") + '\n';
  }
  try {
    make_dir_or_fail(o.out);
    write_or_fail(fs::path(o.out) / "summary.csv", combined);
  } catch (const Failure& f) {
    return report(f, err);
  }
  out << "swept " << cells.size() << " cells into " << o.out << '\n';
  return code;
}

int cmd_verify(const RunOptions& o, std::ostream& out, std::ostream& err) {
  try {
    std::optional<Protocol> protocol;
    if (!o.protocol.empty()) protocol = protocol_or_fail(o.protocol);
    EngineOptions options;
    if (o.mutate == "stretch-cs") {
      options.mutation = Mutation::StretchCriticalSection;
    } else if (!o.mutate.empty()) {
      throw Failure{kUsage, "unknown mutation '" + o.mutate + "'"};
    }
    const auto s = prepare(o, protocol, o.overheads);
    const OracleGuard guard;
    const auto horizon = horizon_for(s, o.horizon, guard.max_horizon);
    if (auto why = guard_violation(s, horizon, guard); !why.empty()) {
      throw Failure{kGuard, "oracle guard exceeded: " + why};
    }
    const auto trace = simulate_or_fail(s, horizon, o.seed, options);
    cross_check(s, horizon, trace);
    out << "match: " << trace.events.size() << " events over " << format_duration(horizon)
        << '\n';
    return kOk;
  } catch (const Failure& f) {
    return report(f, err);
  }
}

struct GenerateOptions {
  GeneratorParams params;
  std::string protocol = "mpcp";
  std::vector<double> cs_ratio;
  std::string period_min, period_max, granularity;
  bool table1 = false;
  std::string unit;
  std::string out = "-";
};

int cmd_generate(GenerateOptions g, std::ostream& out, std::ostream& err) {
  try {
    const auto protocol = protocol_or_fail(g.protocol);
    Scenario s;
    if (g.table1) {
      Table1Params t;
      t.protocol = protocol;
      if (!g.unit.empty()) t.unit_ns = duration_or_fail(g.unit, "--unit");
      if (t.unit_ns <= 0) throw Failure{kUsage, "--unit must be positive"};
      s = build_table1_scenario(t);
    } else {
      auto& p = g.params;
      p.protocol = protocol;
      if (!g.cs_ratio.empty()) {
        if (g.cs_ratio.size() != 2) throw Failure{kUsage, "--cs-ratio takes min,max"};
        p.cs_ratio_min = g.cs_ratio[0];
        p.cs_ratio_max = g.cs_ratio[1];
      }
      if (!g.period_min.empty()) p.period_min = duration_or_fail(g.period_min, "--period-min");
      if (!g.period_max.empty()) p.period_max = duration_or_fail(g.period_max, "--period-max");
      if (!g.granularity.empty()) p.granularity = duration_or_fail(g.granularity, "--granularity");
      try {
        s = generate_random_taskset(p);
      } catch (const GeneratorError& e) {
        throw Failure{kInvalidConfig, e.what()};
      }
    }
    const auto text = serialize_scenario(s);
    if (g.out == "-") {
      out << text;
    } else {
      try {
        write_text_file(g.out, text);
      } catch (const std::exception& e) {
        throw Failure{kUsage, e.what()};
      }
    }
    return kOk;
  } catch (const Failure& f) {
    return report(f, err);
  }
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiprocessor real-time locking protocol simulator", "rtsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rtsim 0.1.0");

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and export CSV files");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--protocol", run_opts.protocol, "Override the scenario's protocol");
  run_cmd->add_option("--overheads", run_opts.overheads, "Overhead file replacing [overheads]");

  RunOptions sweep_opts;
  std::vector<std::string> sweep_protocols;
  std::vector<std::string> sweep_overheads;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Run the cross product of protocols and overhead files");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd
      ->add_option("--protocol", sweep_protocols,
                   "Protocols (repeatable or comma separated; 'all' for every protocol)")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--overheads", sweep_overheads, "Overhead files (repeatable)")
      ->delimiter(',');

  RunOptions verify_opts;
  auto* verify_cmd =
      app.add_subcommand("verify", "Compare the engine against the step oracle");
  verify_cmd->add_option("--config", verify_opts.config, "Scenario file")->required();
  verify_cmd->add_option("--protocol", verify_opts.protocol, "Override the scenario's protocol");
  verify_cmd->add_option("--overheads", verify_opts.overheads, "Overhead file");
  verify_cmd->add_option("--horizon", verify_opts.horizon,
                         "Simulated time (default: 10 hyperperiods within the oracle guard)");
  verify_cmd->add_option("--seed", verify_opts.seed, "Run seed");
  verify_cmd->add_option("--mutate", verify_opts.mutate)->group("");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a scenario file");
  gen_cmd->add_flag("--table1", gen.table1, "The 3 x 5 test application instead of a random set");
  gen_cmd->add_option("--unit", gen.unit, "Time unit of the table1 parameters (default 100us)");
  gen_cmd->add_option("--protocol", gen.protocol, "Protocol")->capture_default_str();
  gen_cmd->add_option("--seed", gen.params.seed, "Generator seed");
  gen_cmd->add_option("--processors", gen.params.processors, "M")->capture_default_str();
  gen_cmd->add_option("--tasks", gen.params.tasks, "n")->capture_default_str();
  gen_cmd->add_option("--resources", gen.params.resources, "Z")->capture_default_str();
  gen_cmd->add_option("--utilization", gen.params.utilization, "Total utilization")
      ->capture_default_str();
  gen_cmd->add_option("--cs-ratio", gen.cs_ratio, "min,max fraction of C per section")
      ->delimiter(',');
  gen_cmd->add_option("--period-min", gen.period_min, "Shortest period (default 10ms)");
  gen_cmd->add_option("--period-max", gen.period_max, "Longest period (default 1s)");
  gen_cmd->add_option("--granularity", gen.granularity, "Period granularity (default 1ms)");
  gen_cmd->add_option("--out", gen.out, "Output file, '-' for stdout")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_protocols, sweep_overheads, out, err);
    if (*verify_cmd) return cmd_verify(verify_opts, out, err);
    if (*gen_cmd) return cmd_generate(gen, out, err);
  } catch (const std::exception& e) {
    err << "internal fault: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace rtsim::cli
