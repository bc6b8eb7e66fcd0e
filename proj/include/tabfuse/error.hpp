#pragma once

#include <stdexcept>
#include <string>

namespace tabfuse {

// Error hierarchy used across the library. Everything user-facing derives
// from tabfuse::error so the CLI can catch one type.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be opened / read / written.
struct io_error : error {
    using error::error;
};

// Input bytes are not in the expected format.
struct parse_error : error {
    using error::error;
};

// Well-formed input that violates a domain invariant; message carries the
// location (page id, line index, ...).
struct validation_error : error {
    using error::error;
};

// Argument outside its documented domain.
struct input_error : error {
    using error::error;
};

// Inconsistent run configuration (wrong model for a variant, unknown name).
struct config_error : error {
    using error::error;
};

// Training failures: single-class data, divergence.
struct train_error : error {
    using error::error;
};

// Input kind we deliberately do not handle (encrypted / scanned PDFs).
struct unsupported_input : error {
    using error::error;
};

} // namespace tabfuse
