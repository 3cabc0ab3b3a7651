#pragma once

#include <stdexcept>
#include <string>

namespace tagdrive {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WidthMismatch final : Error {
    using Error::Error;
};

struct MalformedText final : Error {
    using Error::Error;
};

struct IllegalTransition final : Error {
    using Error::Error;
};

struct ScenarioMalformed final : Error {
    using Error::Error;
};

struct SerialCollision final : Error {
    using Error::Error;
};

struct BlobAuthFailure final : Error {
    using Error::Error;
};

struct BindFailure final : Error {
    using Error::Error;
};

struct StorageCorrupt final : Error {
    using Error::Error;
};

struct OversizeSector final : Error {
    using Error::Error;
};

struct ContentAuthFailure final : Error {
    using Error::Error;
};

struct HeaderCorrupt final : Error {
    using Error::Error;
};

} // namespace tagdrive
