#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>

namespace arl {

// Bundled 318-entry English stopword list.
std::unordered_set<std::string> default_stopwords();

// One token per line; blank lines ignored.
std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path);

}  // namespace arl
