#pragma once

#include <string>

namespace recalleval {

/// SHA-256 of the input, as lowercase hex.
std::string sha256_hex(const std::string& data);

}  // namespace recalleval
