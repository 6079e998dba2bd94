#include "mimosim/random.hpp"

#include <cmath>

namespace mimosim {

namespace detail {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

namespace {

std::uint64_t combine(std::uint64_t parent, std::uint64_t label) {
  return detail::splitmix64(parent ^ detail::splitmix64(label + 0x632be59bd9b4e019ULL));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : key_(seed), engine_(detail::splitmix64(seed)) {}

RandomStream RandomStream::derive(std::uint64_t master, std::uint64_t trial,
                                  StreamPurpose purpose) {
  return RandomStream(combine(combine(master, trial), static_cast<std::uint64_t>(purpose)));
}

RandomStream RandomStream::child(std::uint64_t label) const {
  return RandomStream(combine(key_, label));
}

RandomStream RandomStream::child(std::initializer_list<std::uint64_t> labels) const {
  std::uint64_t k = key_;
  for (auto l : labels) k = combine(k, l);
  return RandomStream(k);
}

double RandomStream::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() { return normal_(engine_); }

Complex RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

CMatrix RandomStream::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                            double variance) {
  CMatrix m(rows, cols);
  // Row-major fill order so the draw sequence does not depend on Eigen's
  // storage order.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_normal(variance);
  return m;
}

std::uint64_t RandomStream::bits64() { return engine_(); }

}  // namespace mimosim
