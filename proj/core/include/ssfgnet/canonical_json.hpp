#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace ssfgnet {

/// Serialize with sorted keys, no whitespace, and doubles printed with 17
/// significant digits ("%.17g"), so that parse -> dump is a fixed point.
/// Negative zero prints as 0. Non-finite numbers are rejected.
std::string canonical_dump(const nlohmann::json& j);

} // namespace ssfgnet
