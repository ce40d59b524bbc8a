// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace condfoley::app {

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file(const std::string& path);

}  // namespace condfoley::app
