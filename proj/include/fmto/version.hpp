#pragma once

namespace fmto {

inline constexpr const char* version = "0.1.0";

}  // namespace fmto
