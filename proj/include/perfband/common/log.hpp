#pragma once

#include <iostream>
#include <string>

namespace perfband {

inline void log_warn(const std::string& msg) {
  std::cerr << "[perfband][warn] " << msg << "\n";
}

inline void log_info(const std::string& msg) {
  std::cerr << "[perfband][info] " << msg << "\n";
}

}  // namespace perfband
