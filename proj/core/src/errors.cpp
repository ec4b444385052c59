#include "nlkg/errors.hpp"

namespace nlkg {

Error::Error(std::string kind, const std::string& what)
    : std::runtime_error(what), kind_(std::move(kind)) {}

}  // namespace nlkg
