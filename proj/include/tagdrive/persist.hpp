#pragma once

// Versioned JSON persistence for the registry, the code database, discs and
// scenario files. Serialization is canonical (sorted keys, sorted entries)
// so save/load round-trips are byte-stable.

#include <cstdint>
#include <string>
#include <vector>

#include "tagdrive/activation.hpp"
#include "tagdrive/drive.hpp"
#include "tagdrive/types.hpp"

namespace tagdrive {

std::string format_iso8601(int64_t utc_seconds);
int64_t parse_iso8601(const std::string& text); // throws StorageCorrupt
int64_t now_utc_seconds();

// codedb.json
std::string codedb_to_json(const CodeDatabase& db);
CodeDatabase codedb_from_json(const std::string& text); // throws StorageCorrupt
void save_codedb(const CodeDatabase& db, const std::string& path);
CodeDatabase load_codedb(const std::string& path);

// registry.json
std::string registry_to_json(const SerialRegistry& registry);
SerialRegistry registry_from_json(const std::string& text); // throws StorageCorrupt
void save_registry(const SerialRegistry& registry, const std::string& path);
SerialRegistry load_registry(const std::string& path);

struct Scenario {
    uint64_t seed = 0;
    DriveConfig config;
    std::string db_path; // resolved relative to the scenario file
    std::vector<ScheduledEvent> events;
};

// Scenario JSON: {"seed":u64,"config":{...},"db":path,"events":[...]}.
// Discs are inline objects or paths to disc JSON files.
Scenario scenario_from_json(const std::string& text,
                            const std::string& base_dir); // throws ScenarioMalformed
std::string scenario_to_json(const Scenario& scenario);
Scenario load_scenario(const std::string& path);

Disc disc_from_json(const std::string& text); // throws ScenarioMalformed
std::string disc_to_json(const Disc& disc);

// Whole-file helpers; writes go through a temp file + rename.
std::string read_file(const std::string& path);              // throws StorageCorrupt
void write_file_atomic(const std::string& path, const std::string& data);

} // namespace tagdrive
