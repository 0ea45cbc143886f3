#ifndef RAYSIM_ERRORS_HPP_
#define RAYSIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace raysim {

/// Invalid configuration (bad value, missing table entry, malformed file).
class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace raysim

#endif
