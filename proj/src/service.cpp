#include "tagdrive/service.hpp"

#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tagdrive/persist.hpp"

namespace tagdrive {

using nlohmann::json;

namespace {

uint64_t service_seed() {
    // Provisioning secrets and salts must not repeat across service runs.
    std::random_device rd;
    return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

} // namespace

ActivationService::ActivationService(std::string registry_path, unsigned default_width)
    : registry_path_(std::move(registry_path)),
      registry_(default_width),
      rng_(service_seed()),
      server_(std::make_unique<httplib::Server>()) {
    if (std::filesystem::exists(registry_path_)) {
        registry_ = load_registry(registry_path_);
    }
    install_routes();
}

ActivationService::~ActivationService() {
    stop();
}

void ActivationService::install_routes() {
    server_->Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    server_->Get(R"(/v1/blobs/([A-Z0-9\-]+))",
                 [this](const httplib::Request& req, httplib::Response& res) {
                     const std::string serial_text = req.matches[1];
                     std::shared_lock lock(mutex_);
                     try {
                         const auto serial = VisibleSerial::parse(serial_text);
                         if (const RegistryEntry* entry = registry_.find(serial)) {
                             const json body = {{"serial", serial.text()},
                                                {"blob", entry->blob.to_base64()}};
                             res.status = 200;
                             res.set_content(body.dump(), "application/json");
                             return;
                         }
                     } catch (const MalformedText&) {
                         // fall through to SerialUnknown
                     }
                     res.status = 404;
                     res.set_content(json{{"error", "SerialUnknown"}}.dump(),
                                     "application/json");
                 });

    server_->Post("/v1/provision",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      unsigned width = 0;
                      try {
                          width = json::parse(req.body).at("width").get<unsigned>();
                      } catch (const json::exception&) {
                          res.status = 400;
                          res.set_content(json{{"error", "BadRequest"}}.dump(),
                                          "application/json");
                          return;
                      }
                      std::unique_lock lock(mutex_);
                      if (width != registry_.width()) {
                          res.status = 400;
                          res.set_content(json{{"error", "WidthMismatch"}}.dump(),
                                          "application/json");
                          return;
                      }
                      try {
                          const PurchaseSecret secret = PurchaseSecret::random(rng_);
                          const ProvisionResult result = provision_disc(
                              registry_, width, secret, rng_, now_utc_seconds());
                          save_registry(registry_, registry_path_);
                          // The secret exists only in this response.
                          const json body = {{"serial", result.serial.text()},
                                             {"blob", result.blob.to_base64()},
                                             {"secret", secret.text()}};
                          res.status = 201;
                          res.set_content(body.dump(), "application/json");
                      } catch (const Error& e) {
                          res.status = 500;
                          res.set_content(json{{"error", e.what()}}.dump(),
                                          "application/json");
                      }
                  });
}

void ActivationService::serve(const std::string& host, int port) {
    if (!server_->bind_to_port(host, port)) {
        throw BindFailure("cannot bind " + host + ":" + std::to_string(port));
    }
    server_->listen_after_bind();
}

int ActivationService::start_background(const std::string& host) {
    const int port = server_->bind_to_any_port(host);
    if (port <= 0) {
        throw BindFailure("cannot bind " + host);
    }
    worker_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void ActivationService::stop() {
    if (server_) {
        server_->stop();
    }
    if (worker_.joinable()) {
        worker_.join();
    }
}

std::pair<std::string, int> parse_bind_address(const std::string& bind) {
    const size_t colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= bind.size()) {
        throw BindFailure("bind address must be host:port, got '" + bind + "'");
    }
    const std::string host = bind.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(bind.substr(colon + 1));
    } catch (const std::exception&) {
        throw BindFailure("bad port in bind address '" + bind + "'");
    }
    if (port < 0 || port > 65535) {
        throw BindFailure("port out of range in '" + bind + "'");
    }
    return {host, port};
}

} // namespace tagdrive
