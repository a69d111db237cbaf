#ifndef WERNERSIM_VERSION_HPP
#define WERNERSIM_VERSION_HPP

namespace wernersim {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
