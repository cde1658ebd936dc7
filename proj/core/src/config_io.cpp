#include "rtsim/config_io.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace rtsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

std::uint32_t parse_uint(std::size_t line, std::string_view key, std::string_view value) {
  std::uint32_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    fail(line, "'" + std::string(key) + "' expects a non-negative integer, got '" +
                   std::string(value) + "'");
  }
  return out;
}

TimeNs parse_time(std::size_t line, std::string_view key, std::string_view value) {
  try {
    return parse_duration(value);
  } catch (const std::invalid_argument& e) {
    fail(line, "'" + std::string(key) + "': " + e.what());
  }
}

enum class Section { None, System, Overheads, Resource, Task };

struct PendingTask {
  TaskSpec spec;
  bool has_deadline = false;
};

void apply_overhead(OverheadModel& o, std::size_t line, std::string_view key,
                    std::string_view value) {
  if (key == "lock") {
    o.lock = parse_time(line, key, value);
  } else if (key == "unlock") {
    o.unlock = parse_time(line, key, value);
  } else if (key == "migrate_to" || key == "mig_to") {
    o.migrate_to = parse_time(line, key, value);
  } else if (key == "migrate_back" || key == "mig_bk") {
    o.migrate_back = parse_time(line, key, value);
  } else if (key == "context_switch" || key == "ctx") {
    o.context_switch = parse_time(line, key, value);
  } else {
    fail(line, "unknown [overheads] key '" + std::string(key) + "'");
  }
}

template <typename Fn>
void for_each_entry(std::string_view text, Fn&& on_line) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view raw =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (!raw.empty()) on_line(line_no, raw);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

std::pair<std::string_view, std::string_view> key_value(std::size_t line, std::string_view raw) {
  const auto eq = raw.find('=');
  if (eq == std::string_view::npos) fail(line, "expected key = value, got '" + std::string(raw) + "'");
  auto key = trim(raw.substr(0, eq));
  auto value = trim(raw.substr(eq + 1));
  if (key.empty()) fail(line, "empty key");
  return {key, value};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  Scenario scenario;
  Section section = Section::None;
  bool roles_given = false;
  std::vector<PendingTask> tasks;

  for_each_entry(text, [&](std::size_t line, std::string_view raw) {
    if (raw.front() == '[') {
      if (raw == "[system]") {
        section = Section::System;
      } else if (raw == "[overheads]") {
        section = Section::Overheads;
      } else if (raw == "[resource]") {
        section = Section::Resource;
        scenario.resources.emplace_back();
      } else if (raw == "[task]") {
        section = Section::Task;
        tasks.emplace_back();
      } else {
        fail(line, "unknown section " + std::string(raw));
      }
      return;
    }
    auto [key, value] = key_value(line, raw);
    switch (section) {
      case Section::None:
        fail(line, "key outside of any section");
      case Section::System:
        if (key == "processors") {
          scenario.system.processors = parse_uint(line, key, value);
        } else if (key == "roles") {
          scenario.system.roles.clear();
          for (auto role : split(value, ',')) {
            if (role == "app" || role == "application") {
              scenario.system.roles.push_back(ProcessorRole::Application);
            } else if (role == "sync" || role == "synchronization") {
              scenario.system.roles.push_back(ProcessorRole::Synchronization);
            } else {
              fail(line, "unknown processor role '" + std::string(role) + "'");
            }
          }
          roles_given = true;
        } else if (key == "protocol") {
          auto p = parse_protocol(value);
          if (!p) fail(line, "unknown protocol '" + std::string(value) + "'");
          scenario.system.protocol = *p;
        } else {
          fail(line, "unknown [system] key '" + std::string(key) + "'");
        }
        break;
      case Section::Overheads:
        apply_overhead(scenario.system.overheads, line, key, value);
        break;
      case Section::Resource: {
        auto& r = scenario.resources.back();
        if (key == "id") {
          r.id = parse_uint(line, key, value);
        } else if (key == "ceiling") {
          r.ceiling = Priority{parse_uint(line, key, value)};
        } else if (key == "sync_processor") {
          r.sync_processor = parse_uint(line, key, value);
        } else {
          fail(line, "unknown [resource] key '" + std::string(key) + "'");
        }
        break;
      }
      case Section::Task: {
        auto& t = tasks.back();
        if (key == "id") {
          t.spec.id = parse_uint(line, key, value);
        } else if (key == "wcet") {
          t.spec.wcet = parse_time(line, key, value);
        } else if (key == "period") {
          t.spec.period = parse_time(line, key, value);
        } else if (key == "deadline") {
          t.spec.deadline = parse_time(line, key, value);
          t.has_deadline = true;
        } else if (key == "priority") {
          t.spec.priority = Priority{parse_uint(line, key, value)};
        } else if (key == "processor") {
          t.spec.home_processor = parse_uint(line, key, value);
        } else if (key == "cs") {
          for (auto item : split(value, ',')) {
            auto fields = split(item, ':');
            if (fields.size() != 3) fail(line, "cs expects resource:offset:length");
            t.spec.critical_sections.push_back({parse_uint(line, "cs resource", fields[0]),
                                                parse_time(line, "cs offset", fields[1]),
                                                parse_time(line, "cs length", fields[2])});
          }
        } else {
          fail(line, "unknown [task] key '" + std::string(key) + "'");
        }
        break;
      }
    }
  });

  if (!roles_given) {
    scenario.system.roles.assign(scenario.system.processors, ProcessorRole::Application);
  }
  for (auto& t : tasks) {
    if (!t.has_deadline) t.spec.deadline = t.spec.period;
    scenario.tasks.push_back(std::move(t.spec));
  }
  return scenario;
}

std::string serialize_overheads(const OverheadModel& o) {
  std::ostringstream out;
  out << "[overheads]\n"
      << "lock = " << format_duration(o.lock) << '\n'
      << "unlock = " << format_duration(o.unlock) << '\n'
      << "migrate_to = " << format_duration(o.migrate_to) << '\n'
      << "migrate_back = " << format_duration(o.migrate_back) << '\n'
      << "context_switch = " << format_duration(o.context_switch) << '\n';
  return out.str();
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "[system]\n"
      << "processors = " << s.system.processors << '\n'
      << "roles = ";
  for (std::size_t i = 0; i < s.system.roles.size(); ++i) {
    out << (i ? ", " : "") << to_string(s.system.roles[i]);
  }
  out << '\n' << "protocol = " << to_string(s.system.protocol) << "\n\n";
  out << serialize_overheads(s.system.overheads);

  for (const auto& r : s.resources) {
    out << "\n[resource]\nid = " << r.id << '\n';
    if (r.ceiling) out << "ceiling = " << r.ceiling->value() << '\n';
    if (r.sync_processor) out << "sync_processor = " << *r.sync_processor << '\n';
  }
  for (const auto& t : s.tasks) {
    out << "\n[task]\n"
        << "id = " << t.id << '\n'
        << "wcet = " << format_duration(t.wcet) << '\n'
        << "period = " << format_duration(t.period) << '\n'
        << "deadline = " << format_duration(t.deadline) << '\n'
        << "priority = " << t.priority.value() << '\n'
        << "processor = " << t.home_processor << '\n';
    for (const auto& cs : t.critical_sections) {
      out << "cs = " << cs.resource << ':' << format_duration(cs.offset) << ':'
          << format_duration(cs.length) << '\n';
    }
  }
  return out.str();
}

OverheadModel parse_overheads(std::string_view text) {
  OverheadModel o;
  for_each_entry(text, [&](std::size_t line, std::string_view raw) {
    if (raw.front() == '[') {
      if (raw != "[overheads]") fail(line, "overhead files only hold an [overheads] section");
      return;
    }
    auto [key, value] = key_value(line, raw);
    apply_overhead(o, line, key, value);
  });
  return o;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  try {
    return parse_scenario(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

OverheadModel load_overheads(const std::filesystem::path& path) {
  try {
    return parse_overheads(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace rtsim
