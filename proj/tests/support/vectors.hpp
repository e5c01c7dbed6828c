#pragma once

#include <filesystem>
#include <string>

#include "ocsplab/textio.hpp"

namespace ocsplab::testing {

/// Value of `key` in fixtures/vectors/<file>.
inline std::string fixture_vector(const std::string& file, const std::string& key) {
  return KvRecord::parse(read_text_file(std::filesystem::path(OCSPLAB_FIXTURE_DIR) / "vectors" / file)).require(key);
}

}  // namespace ocsplab::testing
