#pragma once

#include <stdexcept>
#include <string>

namespace situate {

// Data-dependent failures: bad records, degenerate inputs, contract
// violations found at run time. Mapped to exit code 2 by the CLI.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / stream failures. Mapped to exit code 3 by the CLI.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents: bad magic, truncated payloads, schema mismatch.
class format_error : public io_error {
public:
    explicit format_error(const std::string& what) : io_error(what) {}
};

} // namespace situate
