#pragma once

#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace allconv {

// Error taxonomy. The CLI maps these onto exit codes:
//   config_error / format_error -> 1, contract_error -> 2, numeric_error -> 3.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct contract_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw contract_error(msg);
}

inline void require_config(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

inline void log_warn(const std::string& msg) {
  std::cerr << "[allconv] warning: " << msg << '\n';
}

inline void log_info(const std::string& msg) {
  std::cerr << "[allconv] " << msg << '\n';
}

template <typename... Args>
std::string format_msg(Args&&... args) {
  std::ostringstream oss;
  (oss << ... << args);
  return oss.str();
}

}  // namespace allconv
