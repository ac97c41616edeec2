#pragma once

#include <stdexcept>
#include <string>

namespace mcshape {

// Error taxonomy shared by the library and the CLI exit-code contract.

struct degenerate_shape : std::runtime_error {
    explicit degenerate_shape(const std::string& what) : std::runtime_error(what) {}
};

struct singular_map : std::runtime_error {
    explicit singular_map(const std::string& what) : std::runtime_error(what) {}
};

struct overlapping_components : std::runtime_error {
    explicit overlapping_components(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_histogram : std::runtime_error {
    explicit degenerate_histogram(const std::string& what) : std::runtime_error(what) {}
};

struct io_error : std::runtime_error {
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mcshape
