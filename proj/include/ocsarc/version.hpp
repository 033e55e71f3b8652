#pragma once

namespace ocsarc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ocsarc
