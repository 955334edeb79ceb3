#pragma once

namespace doclair {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace doclair
