#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "rtsim/model.hpp"

namespace rtsim {

/// Malformed scenario or overhead text. The message carries the line number.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario files are line oriented:
//
//   # comment
//   [system]      processors, roles (app|sync, comma separated), protocol
//   [overheads]   lock, unlock, migrate_to, migrate_back, context_switch
//   [resource]    id, ceiling (optional), sync_processor (optional)
//   [task]        id, wcet, period, deadline (defaults to period), priority,
//                 processor, cs = <resource>:<offset>:<length> (repeatable)
//
// Every [resource] and [task] header opens a new record. Durations accept
// ns/us/ms/s suffixes; a bare integer is nanoseconds. Unknown keys are errors.

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& scenario);

/// Overhead files hold a single [overheads] section (the header is optional).
OverheadModel parse_overheads(std::string_view text);
OverheadModel load_overheads(const std::filesystem::path& path);
std::string serialize_overheads(const OverheadModel& overheads);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rtsim
