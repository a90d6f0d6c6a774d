#pragma once

namespace proxpinv {
inline constexpr const char* version = "0.1.0";
}
