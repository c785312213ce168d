#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradsign {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes incompatible with the requested operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A numeric argument outside its valid range (clamp bounds, pixel range, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

// Invalid configuration: layer geometry, attack/training hyperparameters,
// epsilon grids, synthetic dataset requests.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Class label outside [0, num_classes).
class LabelError : public Error {
public:
    using Error::Error;
};

// Dataset-level problems (empty dataset, inconsistent image sizes).
class DataError : public Error {
public:
    using Error::Error;
};

// ForwardTrace does not belong to the model passed to backward().
class TraceError : public Error {
public:
    using Error::Error;
};

// Malformed binary input (checkpoint or PPM); carries the byte offset at
// which parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& msg, std::size_t offset)
        : Error(msg + " (byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// A file could not be read or decoded during dataset ingestion; message
// names the offending file.
class IngestionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gradsign
