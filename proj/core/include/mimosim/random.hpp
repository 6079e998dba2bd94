#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mimosim/types.hpp"

namespace mimosim {

// Purpose tags for child streams. Values are part of the reproducibility
// contract: append new tags, never renumber.
enum class StreamPurpose : std::uint64_t {
  Geometry = 1,
  Shadowing = 2,
  Channel = 3,
  Frames = 4,
  Oracle = 5,
  Test = 99,
};

/// Deterministic random stream derived from a hierarchical key.
///
/// A stream is identified by a master seed plus a path of 64-bit labels
/// (trial index, purpose tag, sub-indices). The path is hashed with a
/// SplitMix64 finalizer into the seed of a Mersenne Twister, so two streams
/// with different paths are statistically independent and adding a new
/// purpose never shifts the draws of an existing one.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  /// Stream for (master, trial, purpose).
  static RandomStream derive(std::uint64_t master, std::uint64_t trial,
                             StreamPurpose purpose);

  /// Child stream keyed by `label`; does not advance this stream.
  RandomStream child(std::uint64_t label) const;
  RandomStream child(std::initializer_list<std::uint64_t> labels) const;

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();  // N(0, 1)
  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_normal(double variance = 1.0);
  /// Matrix of i.i.d. CN(0, variance) entries.
  CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0);
  std::uint64_t bits64();

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

namespace detail {
std::uint64_t splitmix64(std::uint64_t x);
}  // namespace detail

}  // namespace mimosim
