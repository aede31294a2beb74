#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nilmaug/series.hpp"

namespace testing {

/// Series from a dense value list; NaN entries become gaps.
inline nilmaug::PowerSeries series(const std::vector<double>& values, std::int64_t period = 1,
                                   std::int64_t start = 0, const std::string& name = "s") {
  nilmaug::PowerSeries s;
  s.start = start;
  s.period = period;
  s.name = name;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isnan(values[i])) s.samples.push_back({static_cast<std::int64_t>(i), values[i], std::nullopt});
  return s;
}

inline std::vector<double> values(const nilmaug::PowerSeries& s) {
  std::vector<double> v;
  for (const auto& smp : s.samples) v.push_back(smp.real_w);
  return v;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("nilmaug-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testing
