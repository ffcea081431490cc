#pragma once

#include <string>
#include <string_view>

namespace arl {

/// Porter (1980) suffix-stripping stemmer, following the reference ANSI C
/// release (including its two documented departures: "bli"->"ble" in step 2
/// and the extra "logi"->"log" rule).
///
/// Tokens that are not entirely lowercase ASCII letters are returned as is.
/// Words of length <= 2 are never changed.
std::string porter_stem(std::string_view token);

}  // namespace arl
