#include "sthrn/run_config.hpp"

#include <cmath>
#include <functional>
#include <istream>
#include <sstream>

#include "sthrn/errors.hpp"
#include "text_util.hpp"

namespace sthrn {

namespace {

std::size_t to_count(std::string_view key, std::string_view text) {
  double v = 0.0;
  if (!detail::parse_double(std::string(text), v) || v < 0.0 || v > 9.0e15 || v != std::floor(v)) {
    throw ValidationError(std::string(key) + ": expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return static_cast<std::size_t>(v);
}

double to_real(std::string_view key, std::string_view text) {
  double v = 0.0;
  if (!detail::parse_double(std::string(text), v)) {
    throw ValidationError(std::string(key) + ": expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError(std::string(key) + ": expected true or false, got '" + std::string(text) + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Entry {
  ConfigKey key;
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define COUNT_FIELD(name, member, help)                                                        \
  Entry {                                                                                      \
    {name, help}, [](TrainConfig& c, std::string_view v) { c.member = to_count(name, v); },    \
        [](const TrainConfig& c) { return std::to_string(c.member); }                          \
  }
#define REAL_FIELD(name, member, help)                                                         \
  Entry {                                                                                      \
    {name, help}, [](TrainConfig& c, std::string_view v) { c.member = to_real(name, v); },     \
        [](const TrainConfig& c) { return detail::format_double(c.member); }                   \
  }
#define BOOL_FIELD(name, member, help)                                                         \
  Entry {                                                                                      \
    {name, help}, [](TrainConfig& c, std::string_view v) { c.member = to_bool(name, v); },     \
        [](const TrainConfig& c) { return from_bool(c.member); }                               \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      COUNT_FIELD("hidden", model.encoder.hidden, "encoder hidden size H"),
      COUNT_FIELD("layers", model.encoder.layers, "encoder layers L"),
      BOOL_FIELD("disable_global_temporal", model.encoder.disable_global_temporal,
                 "ablation: remove the global temporal state"),
      BOOL_FIELD("disable_global_spatial", model.encoder.disable_global_spatial,
                 "ablation: remove the global spatial state"),
      Entry{{"decoder", "structured or plain-lstm (ablation)"},
            [](TrainConfig& c, std::string_view v) { c.model.decoder = parse_decoder_kind(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.model.decoder)); }},
      COUNT_FIELD("batch_size", batch_size, "windows per iteration"),
      REAL_FIELD("learning_rate", learning_rate, "Adam step size"),
      COUNT_FIELD("iterations", iterations, "optimizer steps"),
      REAL_FIELD("beta1", beta1, "Adam first-moment decay"),
      REAL_FIELD("beta2", beta2, "Adam second-moment decay"),
      REAL_FIELD("epsilon", epsilon, "Adam denominator offset"),
      COUNT_FIELD("observed", observed, "observed frames t per window"),
      COUNT_FIELD("horizon", horizon, "predicted frames (short term)"),
      COUNT_FIELD("long_horizon", long_horizon, "predicted frames (long term)"),
      BOOL_FIELD("long_term", long_term, "train on long_horizon instead of horizon"),
      Entry{{"loss", "weighted or l2"},
            [](TrainConfig& c, std::string_view v) { c.loss = parse_loss_kind(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.loss)); }},
      Entry{{"seed", "random seed (falls back to STHRN_SEED)"},
            [](TrainConfig& c, std::string_view v) { c.seed = to_count("seed", v); },
            [](const TrainConfig& c) { return std::to_string(c.seed); }},
      REAL_FIELD("clip_norm", clip_norm, "global gradient norm limit, 0 disables"),
      REAL_FIELD("init_std", init_std, "std of the Gaussian weight initialization"),
      BOOL_FIELD("teacher_forcing", teacher_forcing, "feed ground truth to the decoder during training"),
      COUNT_FIELD("checkpoint_every", checkpoint_every, "write the checkpoint every N iterations, 0 only at the end"),
  };
  return table;
}

#undef COUNT_FIELD
#undef REAL_FIELD
#undef BOOL_FIELD

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

void set_config_value(TrainConfig& config, std::string_view key, std::string_view value) {
  find_entry(key).set(config, detail::trim(value));
}

std::string get_config_value(const TrainConfig& config, std::string_view key) { return find_entry(key).get(config); }

void apply_config(TrainConfig& config, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = detail::trim(detail::strip_comment(line));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    try {
      set_config_value(config, key, value);
    } catch (const ValidationError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
}

std::string dump_config(const TrainConfig& config) {
  std::ostringstream out;
  for (const auto& e : entries()) out << e.key.name << " = " << e.get(config) << '\n';
  return out.str();
}

}  // namespace sthrn
