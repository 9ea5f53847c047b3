#ifndef DGSIM_TESTS_TEST_UTIL_HPP
#define DGSIM_TESTS_TEST_UTIL_HPP

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "dgsim/config.hpp"

namespace dgsim::test {

/// Default scales with small blocks, for tests that do not need 1010 features.
inline GeneratorConfig small_config(std::uint64_t seed = 1, BlockLayout dims = {2, 3, 4, 6}) {
  return with_dims(default_config(seed), dims);
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard error of the mean.
inline double stderr_of_mean(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("dgsim_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& f) const { return path_ / f; }

 private:
  std::filesystem::path path_;
};

}  // namespace dgsim::test

#endif  // DGSIM_TESTS_TEST_UTIL_HPP
