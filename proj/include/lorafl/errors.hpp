#pragma once

#include <stdexcept>
#include <string>

namespace lorafl {

// Shape-incompatible operands (matmul, layer application, aggregation).
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed on-disk data (bad magic, bad version, invalid field values).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Payload shorter/longer than its header declares.
struct LengthError : std::runtime_error {
  explicit LengthError(const std::string& msg) : std::runtime_error(msg) {}
};

// Semantically invalid request (empty dataset, single-class shard, K > C, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lorafl
