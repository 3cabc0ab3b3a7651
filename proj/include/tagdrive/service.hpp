#pragma once

// HTTP activation service: serves published blobs by serial and provisions
// new discs. Lookups run concurrently; provisions are serialized and the
// registry file is rewritten atomically after each one.

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <string>
#include <thread>

#include "tagdrive/activation.hpp"

namespace httplib {
class Server;
}

namespace tagdrive {

class ActivationService {
public:
    // registry_path may name a missing file; it is created on first
    // provision. default_width applies only when starting fresh.
    explicit ActivationService(std::string registry_path,
                               unsigned default_width = TagCode::kDefaultWidth);
    ~ActivationService();

    ActivationService(const ActivationService&) = delete;
    ActivationService& operator=(const ActivationService&) = delete;

    // Blocks until stop(). Throws BindFailure if the address is taken.
    void serve(const std::string& host, int port);

    // Binds to an OS-assigned port and serves on a background thread.
    // Returns the bound port. For tests and embedding.
    int start_background(const std::string& host);
    void stop();

    const std::string& registry_path() const { return registry_path_; }

private:
    void install_routes();

    std::string registry_path_;
    SerialRegistry registry_;
    mutable std::shared_mutex mutex_; // shared: lookups, exclusive: provisions
    Rng rng_;
    std::unique_ptr<httplib::Server> server_;
    std::thread worker_;
};

// "host:port" -> pair; throws BindFailure on malformed input.
std::pair<std::string, int> parse_bind_address(const std::string& bind);

} // namespace tagdrive
