// tagdrive: provision discs, run the activation client/server, execute
// insertion scenarios and emit run/eject signal traces.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tagdrive/activation.hpp"
#include "tagdrive/content.hpp"
#include "tagdrive/drive.hpp"
#include "tagdrive/persist.hpp"
#include "tagdrive/service.hpp"
#include "tagdrive/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitUnreachable = 4;

uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

int cmd_provision(int n, unsigned width, const std::string& registry_path,
                  std::optional<uint64_t> seed, const std::string& codes_csv) {
    tagdrive::SerialRegistry registry(width);
    if (std::ifstream(registry_path).good()) {
        registry = tagdrive::load_registry(registry_path);
        if (registry.width() != width) {
            std::cerr << "registry " << registry_path << " has width "
                      << registry.width() << ", requested " << width << "\n";
            return kExitData;
        }
    }

    std::vector<tagdrive::TagCode> forced;
    if (!codes_csv.empty()) {
        for (const std::string& c : split_csv(codes_csv)) {
            forced.push_back(tagdrive::TagCode::parse(c, width));
        }
        if (forced.size() != static_cast<size_t>(n)) {
            std::cerr << "--codes lists " << forced.size() << " codes but -n is "
                      << n << "\n";
            return kExitUsage;
        }
    }

    tagdrive::Rng rng(seed ? *seed : fresh_seed());
    for (int i = 0; i < n; ++i) {
        const auto secret = tagdrive::PurchaseSecret::random(rng);
        const std::optional<tagdrive::TagCode> code =
            forced.empty() ? std::nullopt : std::optional(forced[i]);
        const auto result = tagdrive::provision_disc(
            registry, width, secret, rng, tagdrive::now_utc_seconds(), code);
        std::cout << result.serial.text() << " " << secret.text() << "\n";
    }
    if (n > 0) {
        tagdrive::save_registry(registry, registry_path);
    }
    return kExitOk;
}

int cmd_activate(const std::string& serial_text, const std::string& secret_text,
                 const std::string& db_path, unsigned width,
                 const std::string& url, const std::string& registry_path) {
    const auto serial = tagdrive::VisibleSerial::parse(serial_text);
    const auto secret = tagdrive::PurchaseSecret::parse(secret_text);

    tagdrive::ActivationBlob blob;
    if (!url.empty()) {
        httplib::Client client(url);
        const auto res = client.Get("/v1/blobs/" + serial.text());
        if (!res) {
            std::cerr << "service at " << url << " unreachable\n";
            return kExitUnreachable;
        }
        if (res->status != 200) {
            std::cerr << "service returned " << res->status << ": " << res->body
                      << "\n";
            return kExitData;
        }
        blob = tagdrive::ActivationBlob::from_base64(
            nlohmann::json::parse(res->body).at("blob").get<std::string>());
    } else if (!registry_path.empty()) {
        const auto registry = tagdrive::load_registry(registry_path);
        const tagdrive::RegistryEntry* entry = registry.find(serial);
        if (entry == nullptr) {
            std::cerr << "serial " << serial.text() << " not in registry\n";
            return kExitData;
        }
        blob = entry->blob;
    } else {
        std::cerr << "need --url or --registry to fetch the blob\n";
        return kExitUsage;
    }

    tagdrive::CodeDatabase db(width);
    if (std::ifstream(db_path).good()) {
        db = tagdrive::load_codedb(db_path);
    }
    tagdrive::activate(blob, secret, db, serial, tagdrive::now_utc_seconds());
    tagdrive::save_codedb(db, db_path);
    std::cout << "activated " << serial.text() << " into " << db_path << "\n";
    return kExitOk;
}

int cmd_serve(const std::string& registry_path, const std::string& bind,
              unsigned width) {
    const auto [host, port] = tagdrive::parse_bind_address(bind);
    tagdrive::ActivationService service(registry_path, width);
    std::cout << "serving " << registry_path << " on " << host << ":" << port
              << "\n";
    service.serve(host, port);
    return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& out_prefix) {
    const tagdrive::Scenario scenario = tagdrive::load_scenario(scenario_path);
    if (scenario.db_path.empty()) {
        std::cerr << "scenario names no code database\n";
        return kExitData;
    }
    const tagdrive::CodeDatabase db = tagdrive::load_codedb(scenario.db_path);
    const tagdrive::SignalTrace trace =
        tagdrive::run_scenario(scenario.events, db, scenario.config, scenario.seed);
    tagdrive::save_trace_csv(trace, out_prefix + ".csv");
    tagdrive::save_trace_vcd(trace, out_prefix + ".vcd");
    std::cout << "wrote " << out_prefix << ".csv and " << out_prefix << ".vcd ("
              << trace.samples().size() << " samples)\n";
    return kExitOk;
}

int cmd_seal(const std::string& code_text, unsigned width,
             const std::string& serial_text, const std::string& in_path,
             const std::string& out_path, uint32_t sector_size,
             std::optional<uint64_t> seed) {
    const auto code = tagdrive::TagCode::parse(code_text, width);
    const auto serial = tagdrive::VisibleSerial::parse(serial_text);
    const std::string data = tagdrive::read_file(in_path);

    std::vector<std::vector<uint8_t>> sectors;
    for (size_t pos = 0; pos < data.size(); pos += sector_size) {
        const size_t len = std::min<size_t>(sector_size, data.size() - pos);
        sectors.emplace_back(data.begin() + pos, data.begin() + pos + len);
    }

    tagdrive::Rng rng(seed ? *seed : fresh_seed());
    const auto image =
        tagdrive::seal_content(sectors, code, serial, rng, sector_size);
    tagdrive::save_image(image, out_path);
    std::cout << "sealed " << data.size() << " bytes into " << sectors.size()
              << " sectors at " << out_path << "\n";
    return kExitOk;
}

int cmd_open(const std::string& code_text, unsigned width,
             const std::string& serial_text, const std::string& in_path,
             const std::string& out_path) {
    const auto code = tagdrive::TagCode::parse(code_text, width);
    const auto serial = tagdrive::VisibleSerial::parse(serial_text);
    const auto image = tagdrive::load_image(in_path);
    const auto sectors = tagdrive::open_content(image, code, serial);

    std::string data;
    for (const auto& s : sectors) {
        data.append(s.begin(), s.end());
    }
    tagdrive::write_file_atomic(out_path, data);
    std::cout << "opened " << sectors.size() << " sectors, " << data.size()
              << " bytes to " << out_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RFID-authenticated disc toolchain: provision, activate, simulate"};
    app.require_subcommand(1);

    // provision
    auto* provision = app.add_subcommand("provision", "mint discs into a registry");
    int prov_n = 1;
    unsigned prov_width = tagdrive::TagCode::kDefaultWidth;
    std::string prov_registry;
    std::optional<uint64_t> prov_seed;
    std::string prov_codes;
    provision->add_option("-n", prov_n, "number of discs")->check(CLI::NonNegativeNumber);
    provision->add_option("--width", prov_width, "code width in bits");
    provision->add_option("--registry", prov_registry, "registry.json path")
        ->envname("TAGDRIVE_REGISTRY")
        ->required();
    provision->add_option("--seed", prov_seed, "entropy seed (omit for random)");
    provision->add_option("--codes", prov_codes,
                          "comma-separated canonical codes to force, one per disc");

    // activate
    auto* activate = app.add_subcommand("activate", "unlock a blob into the local code database");
    std::string act_serial, act_secret, act_db, act_url, act_registry;
    unsigned act_width = tagdrive::TagCode::kDefaultWidth;
    activate->add_option("--serial", act_serial, "visible serial")->required();
    activate->add_option("--secret", act_secret, "purchase secret")->required();
    activate->add_option("--db", act_db, "codedb.json path")->required();
    activate->add_option("--width", act_width, "code width when creating a new database");
    activate->add_option("--url", act_url, "activation service base URL");
    activate->add_option("--registry", act_registry, "local registry.json instead of a service")
        ->envname("TAGDRIVE_REGISTRY");

    // serve
    auto* serve = app.add_subcommand("serve", "run the activation service");
    std::string srv_registry, srv_bind = "127.0.0.1:8377";
    unsigned srv_width = tagdrive::TagCode::kDefaultWidth;
    serve->add_option("--registry", srv_registry, "registry.json path")
        ->envname("TAGDRIVE_REGISTRY")
        ->required();
    serve->add_option("--bind", srv_bind, "host:port")->envname("TAGDRIVE_BIND");
    serve->add_option("--width", srv_width, "code width when starting a fresh registry");

    // run
    auto* run = app.add_subcommand("run", "execute a scenario and write trace files");
    std::string run_scenario_path, run_out;
    run->add_option("scenario", run_scenario_path, "scenario JSON path")->required();
    run->add_option("-o,--out", run_out, "output prefix for .csv/.vcd")->required();

    // seal
    auto* seal = app.add_subcommand("seal", "seal a content file to (code, serial)");
    std::string seal_code, seal_serial, seal_in, seal_out;
    unsigned seal_width = tagdrive::TagCode::kDefaultWidth;
    uint32_t seal_sector = tagdrive::SealedImage::kDefaultSectorSize;
    std::optional<uint64_t> seal_seed;
    seal->add_option("--code", seal_code, "tag code (canonical text)")->required();
    seal->add_option("--width", seal_width, "code width in bits");
    seal->add_option("--serial", seal_serial, "visible serial")->required();
    seal->add_option("--in", seal_in, "input file")->required();
    seal->add_option("--out", seal_out, "output image")->required();
    seal->add_option("--sector-size", seal_sector, "sector payload size");
    seal->add_option("--seed", seal_seed, "nonce seed (omit for random)");

    // open
    auto* open = app.add_subcommand("open", "open a sealed image");
    std::string open_code, open_serial, open_in, open_out;
    unsigned open_width = tagdrive::TagCode::kDefaultWidth;
    open->add_option("--code", open_code, "tag code (canonical text)")->required();
    open->add_option("--width", open_width, "code width in bits");
    open->add_option("--serial", open_serial, "visible serial")->required();
    open->add_option("--in", open_in, "sealed image")->required();
    open->add_option("--out", open_out, "output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (provision->parsed()) {
            return cmd_provision(prov_n, prov_width, prov_registry, prov_seed, prov_codes);
        }
        if (activate->parsed()) {
            return cmd_activate(act_serial, act_secret, act_db, act_width, act_url,
                                act_registry);
        }
        if (serve->parsed()) {
            return cmd_serve(srv_registry, srv_bind, srv_width);
        }
        if (run->parsed()) {
            return cmd_run(run_scenario_path, run_out);
        }
        if (seal->parsed()) {
            return cmd_seal(seal_code, seal_width, seal_serial, seal_in, seal_out,
                            seal_sector, seal_seed);
        }
        if (open->parsed()) {
            return cmd_open(open_code, open_width, open_serial, open_in, open_out);
        }
    } catch (const tagdrive::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
