#include "iukf/random.hpp"

namespace iukf {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t base, std::uint64_t run, Stream stream) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ run);
  return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

Rng make_stream(std::uint64_t base, std::uint64_t run, Stream stream) {
  return Rng(substream_seed(base, run, stream));
}

Vector standard_normal(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  return z;
}

Vector gaussian(Rng& rng, const Matrix& factor) {
  return factor * standard_normal(rng, factor.cols());
}

}  // namespace iukf
