#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sthrn/trainer.hpp"

namespace sthrn {

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every key accepted in config files and as --key flags, in display order.
const std::vector<ConfigKey>& config_keys();

/// Throws ValidationError for unknown keys or unparsable values.
void set_config_value(TrainConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const TrainConfig& config, std::string_view key);

/// Applies `key = value` lines; '#' starts a comment. Throws ParseError with
/// the line number on malformed lines, unknown keys or bad values.
void apply_config(TrainConfig& config, std::istream& in, const std::string& source = "<stream>");

/// All keys with their current values, one `key = value` per line.
std::string dump_config(const TrainConfig& config);

}  // namespace sthrn
