#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sse/datamodel.hpp"

namespace sse {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view bytes);

// Digest of every regular file in a dataset directory, keyed by file name.
Json digest_dataset_dir(const std::filesystem::path& dir);

// Provenance block embedded in every report. Holds only values that are
// fixed by the inputs, so reruns reproduce it byte for byte.
Json make_provenance(std::string_view command, const Json& parameters, const Json& inputs,
                     const std::string& prompt = {});

}  // namespace sse
