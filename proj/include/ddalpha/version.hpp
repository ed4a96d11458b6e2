#pragma once

namespace ddalpha {

inline constexpr const char* kToolVersion = "1.0.0";

}
