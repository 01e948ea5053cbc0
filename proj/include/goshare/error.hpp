#pragma once

#include <stdexcept>
#include <string>

namespace goshare {

// Invalid configuration or input file. `field()` carries the path of the
// offending entry, e.g. "phy.bandwidth_hz" or "models[2].curve[4]".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, std::string message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        message_(std::move(message)) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

  // Same error with an outer path component prepended.
  ConfigError under(const std::string& prefix) const {
    return ConfigError(field_.empty() ? prefix : prefix + "." + field_, message_);
  }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace goshare
