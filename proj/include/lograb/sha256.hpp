#pragma once

#include <cstddef>
#include <string>

namespace lograb {

// lowercase hex SHA-256 digest
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& data);

}  // namespace lograb
