#pragma once

#include <string>

namespace lmpaf {

// SHA-256 digest as lowercase hex; used for the run manifest.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace lmpaf
