#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sthrn/adam.hpp"
#include "sthrn/model.hpp"
#include "sthrn/params.hpp"
#include "sthrn/skeleton.hpp"

namespace sthrn {

/// Trained model plus everything needed to rebuild and inspect it.
///
/// File layout (all integers and doubles little-endian):
///   "STHRNCK1"  u32 version
///   u64 n, n bytes of "key=value\n" config text
///   u64 iteration
///   u64 tensor count, then per tensor: u64 name length, name, u32 rank,
///     u64 rows, u64 cols, rows*cols f64 values
///   u64 adam step, then the first and second moments of every tensor as f64
struct Checkpoint {
  ModelConfig model;
  ChainLayout layout;
  std::vector<double> entry_lengths;
  /// Training settings stored for reference; not needed to rebuild the model.
  std::vector<std::pair<std::string, std::string>> settings;
  std::size_t iteration = 0;
  ParamStore params;
  AdamState adam;

  /// Model with this checkpoint's parameters. Throws ValidationError if the
  /// stored tensors do not match the architecture.
  Model build() const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint make_checkpoint(const Model& model, std::vector<double> entry_lengths);

void write_checkpoint(std::ostream& out, const Checkpoint& ck);
Checkpoint read_checkpoint(std::istream& in, const std::string& source = "<stream>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sthrn
