#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace fgr {

enum class Purpose : std::uint8_t { data, kmeans, replay, training, decoding };

std::string_view purpose_name(Purpose p);

/// Seeded random stream tied to one purpose. Streams with different
/// purposes (or different fork tags) are seeded from disjoint hashes, so
/// draws on one never shift the sequence of another.
class RngStream {
 public:
  RngStream(std::uint64_t seed, Purpose purpose);

  std::uint64_t seed() const { return seed_; }
  Purpose purpose() const { return purpose_; }

  /// Child stream derived from (seed, purpose, tag); does not advance this stream.
  RngStream fork(std::uint64_t tag) const;

  double uniform();
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  std::vector<double> dirichlet(std::span<const double> alpha);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), engine_);
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::mt19937_64& engine() { return engine_; }

 private:
  RngStream(std::uint64_t seed, Purpose purpose, std::uint64_t derived);

  std::uint64_t seed_;
  Purpose purpose_;
  std::uint64_t state_seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace fgr
