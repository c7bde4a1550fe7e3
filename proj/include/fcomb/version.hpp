#pragma once

namespace fcomb {

inline constexpr const char* kFcombVersion = "1.0.0";

}  // namespace fcomb
