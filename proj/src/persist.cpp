#include "tagdrive/persist.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace tagdrive {

using nlohmann::json;

std::string format_iso8601(int64_t utc_seconds) {
    const std::time_t t = static_cast<std::time_t>(utc_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

int64_t parse_iso8601(const std::string& text) {
    std::tm tm{};
    int y, mo, d, h, mi, s;
    char z;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi,
                    &s, &z) != 7 ||
        z != 'Z') {
        throw StorageCorrupt("bad timestamp '" + text + "'");
    }
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    const time_t t = timegm(&tm);
    if (t == static_cast<time_t>(-1)) {
        throw StorageCorrupt("unrepresentable timestamp '" + text + "'");
    }
    return static_cast<int64_t>(t);
}

int64_t now_utc_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw StorageCorrupt("cannot open " + path);
    }
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

void write_file_atomic(const std::string& path, const std::string& data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw StorageCorrupt("cannot write " + tmp);
        }
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) {
            throw StorageCorrupt("short write to " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw StorageCorrupt("cannot rename " + tmp + " to " + path + ": " +
                             ec.message());
    }
}

// --- codedb.json ------------------------------------------------------

std::string codedb_to_json(const CodeDatabase& db) {
    json entries = json::array();
    for (const auto& [code, rec] : db.entries()) {
        entries.push_back({{"code", code.format()},
                           {"serial", rec.serial.text()},
                           {"activated_at", format_iso8601(rec.activated_at)},
                           {"source", activation_source_name(rec.source)}});
    }
    const json doc = {{"version", 1}, {"width", db.width()}, {"entries", entries}};
    return doc.dump(2) + "\n";
}

CodeDatabase codedb_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("version").get<int>() != 1) {
            throw StorageCorrupt("unsupported codedb version");
        }
        CodeDatabase db(doc.at("width").get<unsigned>());
        for (const auto& e : doc.at("entries")) {
            const TagCode code = TagCode::parse(e.at("code").get<std::string>(), db.width());
            const ActivationRecord rec{
                VisibleSerial::parse(e.at("serial").get<std::string>()),
                parse_iso8601(e.at("activated_at").get<std::string>()),
                activation_source_from_name(e.at("source").get<std::string>())};
            db.insert(code, rec);
        }
        return db;
    } catch (const json::exception& e) {
        throw StorageCorrupt(std::string("bad codedb file: ") + e.what());
    } catch (const MalformedText& e) {
        throw StorageCorrupt(std::string("bad codedb file: ") + e.what());
    } catch (const WidthMismatch& e) {
        throw StorageCorrupt(std::string("bad codedb file: ") + e.what());
    }
}

void save_codedb(const CodeDatabase& db, const std::string& path) {
    write_file_atomic(path, codedb_to_json(db));
}

CodeDatabase load_codedb(const std::string& path) {
    return codedb_from_json(read_file(path));
}

// --- registry.json ----------------------------------------------------

std::string registry_to_json(const SerialRegistry& registry) {
    json entries = json::array();
    for (const auto& [serial, entry] : registry.entries()) {
        entries.push_back({{"serial", serial.text()},
                           {"blob", entry.blob.to_base64()},
                           {"provisioned_at", format_iso8601(entry.provisioned_at)}});
    }
    const json doc = {{"version", 1}, {"width", registry.width()}, {"entries", entries}};
    return doc.dump(2) + "\n";
}

SerialRegistry registry_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("version").get<int>() != 1) {
            throw StorageCorrupt("unsupported registry version");
        }
        SerialRegistry registry(doc.at("width").get<unsigned>());
        for (const auto& e : doc.at("entries")) {
            registry.put(VisibleSerial::parse(e.at("serial").get<std::string>()),
                         RegistryEntry{
                             ActivationBlob::from_base64(e.at("blob").get<std::string>()),
                             parse_iso8601(e.at("provisioned_at").get<std::string>())});
        }
        return registry;
    } catch (const json::exception& e) {
        throw StorageCorrupt(std::string("bad registry file: ") + e.what());
    } catch (const MalformedText& e) {
        throw StorageCorrupt(std::string("bad registry file: ") + e.what());
    } catch (const BlobAuthFailure& e) {
        throw StorageCorrupt(std::string("bad registry file: ") + e.what());
    } catch (const SerialCollision& e) {
        throw StorageCorrupt(std::string("bad registry file: ") + e.what());
    }
}

void save_registry(const SerialRegistry& registry, const std::string& path) {
    write_file_atomic(path, registry_to_json(registry));
}

SerialRegistry load_registry(const std::string& path) {
    return registry_from_json(read_file(path));
}

// --- discs and scenarios ------------------------------------------------

namespace {

Disc disc_from_json_value(const json& j) {
    Disc disc{VisibleSerial::parse(j.at("serial").get<std::string>()),
              std::nullopt,
              nullptr,
              j.value("title", std::string())};
    if (j.contains("tag") && !j.at("tag").is_null()) {
        const json& t = j.at("tag");
        const unsigned width = t.at("width").get<unsigned>();
        disc.tag = RfidTag{TagCode::parse(t.at("code").get<std::string>(), width),
                           band_from_name(t.value("band", std::string("HF_13_56MHz"))),
                           t.value("damaged", false)};
    }
    return disc;
}

json disc_to_json_value(const Disc& disc) {
    json j;
    j["serial"] = disc.serial.text();
    j["title"] = disc.title;
    if (disc.tag) {
        j["tag"] = {{"code", disc.tag->code.format()},
                    {"width", disc.tag->code.width()},
                    {"band", band_name(disc.tag->band)},
                    {"damaged", disc.tag->damaged}};
    } else {
        j["tag"] = nullptr;
    }
    return j;
}

DriveConfig config_from_json_value(const json& j) {
    DriveConfig cfg;
    cfg.spin_up_ms = j.value("spin_up_ms", cfg.spin_up_ms);
    cfg.read_retries = j.value("read_retries", cfg.read_retries);
    cfg.bit_error_rate = j.value("bit_error_rate", cfg.bit_error_rate);
    if (j.contains("reader_bands")) {
        cfg.reader_bands.clear();
        for (const auto& b : j.at("reader_bands")) {
            cfg.reader_bands.insert(band_from_name(b.get<std::string>()));
        }
    }
    return cfg;
}

json config_to_json_value(const DriveConfig& cfg) {
    json bands = json::array();
    for (FrequencyBand b : cfg.reader_bands) bands.push_back(band_name(b));
    return {{"spin_up_ms", cfg.spin_up_ms},
            {"read_retries", cfg.read_retries},
            {"bit_error_rate", cfg.bit_error_rate},
            {"reader_bands", bands}};
}

} // namespace

Disc disc_from_json(const std::string& text) {
    try {
        return disc_from_json_value(json::parse(text));
    } catch (const json::exception& e) {
        throw ScenarioMalformed(std::string("bad disc file: ") + e.what());
    } catch (const MalformedText& e) {
        throw ScenarioMalformed(std::string("bad disc file: ") + e.what());
    }
}

std::string disc_to_json(const Disc& disc) {
    return disc_to_json_value(disc).dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text, const std::string& base_dir) {
    try {
        const json doc = json::parse(text);
        Scenario sc;
        sc.seed = doc.value("seed", uint64_t{0});
        if (doc.contains("config")) {
            sc.config = config_from_json_value(doc.at("config"));
        }
        if (doc.contains("db")) {
            std::filesystem::path p = doc.at("db").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) {
                p = std::filesystem::path(base_dir) / p;
            }
            sc.db_path = p.string();
        }
        for (const auto& e : doc.at("events")) {
            ScheduledEvent ev;
            ev.t_ms = e.at("t_ms").get<int64_t>();
            const std::string action = e.at("action").get<std::string>();
            if (action == "insert") {
                ev.action = ScheduledEvent::Action::Insert;
                const json& d = e.at("disc");
                if (d.is_string()) {
                    std::filesystem::path p = d.get<std::string>();
                    if (p.is_relative() && !base_dir.empty()) {
                        p = std::filesystem::path(base_dir) / p;
                    }
                    ev.disc = disc_from_json(read_file(p.string()));
                } else {
                    ev.disc = disc_from_json_value(d);
                }
            } else if (action == "remove") {
                ev.action = ScheduledEvent::Action::Remove;
            } else {
                throw ScenarioMalformed("unknown action '" + action + "'");
            }
            sc.events.push_back(std::move(ev));
        }
        return sc;
    } catch (const json::exception& e) {
        throw ScenarioMalformed(std::string("bad scenario file: ") + e.what());
    } catch (const MalformedText& e) {
        throw ScenarioMalformed(std::string("bad scenario file: ") + e.what());
    } catch (const WidthMismatch& e) {
        throw ScenarioMalformed(std::string("bad scenario file: ") + e.what());
    } catch (const StorageCorrupt& e) {
        throw ScenarioMalformed(std::string("bad scenario file: ") + e.what());
    }
}

std::string scenario_to_json(const Scenario& scenario) {
    json events = json::array();
    for (const ScheduledEvent& ev : scenario.events) {
        json e;
        e["t_ms"] = ev.t_ms;
        if (ev.action == ScheduledEvent::Action::Insert) {
            e["action"] = "insert";
            e["disc"] = disc_to_json_value(*ev.disc);
        } else {
            e["action"] = "remove";
        }
        events.push_back(std::move(e));
    }
    const json doc = {{"seed", scenario.seed},
                      {"config", config_to_json_value(scenario.config)},
                      {"db", scenario.db_path},
                      {"events", events}};
    return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
    const std::filesystem::path p(path);
    return scenario_from_json(read_file(path), p.parent_path().string());
}

} // namespace tagdrive
