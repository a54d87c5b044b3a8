#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sthrn/geometry.hpp"
#include "sthrn/random.hpp"
#include "sthrn/skeleton.hpp"

namespace testing_util {

inline std::filesystem::path data_dir() { return STHRN_DATA_DIR; }

inline sthrn::SkeletonTopology topology(const std::string& name) {
  return sthrn::load_topology(data_dir() / "topologies" / (name + ".topology"));
}

inline sthrn::Vec3 random_unit(sthrn::Rng& rng) {
  sthrn::Vec3 v(rng.normal(), rng.normal(), rng.normal());
  return v.normalized();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sthrn_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace testing_util
