#ifndef DGSIM_RNG_HPP
#define DGSIM_RNG_HPP

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace dgsim {

using Rng = std::mt19937_64;

// Stream tags. Values are part of the reproducibility contract: changing one
// changes every derived stream.
enum class Stream : std::uint64_t {
  kTheta = 0x7431,
  kDomains = 0x7432,
  kExamples = 0x7433,
  kSplit = 0x7434,
  kAugment = 0x7435,
  kIdTest = 0x7436,
  kOodTest = 0x7437,
  kVerify = 0x7438,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed of `seed` keyed by an ordered list of tags. Independent of how
/// many other children are derived, so tasks can be scheduled in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Overwrites `out` with i.i.d. N(0, variance) draws, in index order.
template <typename Derived>
void fill_normal(Rng& rng, double variance, Eigen::DenseBase<Derived>& out) {
  boost::random::normal_distribution<double> normal(0.0, std::sqrt(variance));
  for (Eigen::Index i = 0; i < out.size(); ++i) out.derived().coeffRef(i) = normal(rng);
}

template <typename Derived>
void fill_normal(Rng& rng, double variance, Eigen::DenseBase<Derived>&& out) {
  fill_normal(rng, variance, out);
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace dgsim

#endif  // DGSIM_RNG_HPP
