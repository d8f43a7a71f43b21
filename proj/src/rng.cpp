#include "fgr/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fgr {

std::string_view purpose_name(Purpose p) {
  switch (p) {
    case Purpose::data: return "data";
    case Purpose::kmeans: return "kmeans";
    case Purpose::replay: return "replay";
    case Purpose::training: return "training";
    case Purpose::decoding: return "decoding";
  }
  return "unknown";
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, Purpose purpose)
    : RngStream(seed, purpose, mix64(mix64(seed) ^ (0x51ed270b3a1f4c1dULL * (static_cast<std::uint64_t>(purpose) + 1)))) {}

RngStream::RngStream(std::uint64_t seed, Purpose purpose, std::uint64_t derived)
    : seed_(seed), purpose_(purpose), state_seed_(derived), engine_(derived) {}

RngStream RngStream::fork(std::uint64_t tag) const {
  return RngStream(seed_, purpose_, mix64(state_seed_ ^ mix64(tag + 0x2545f4914f6cdd1dULL)));
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal(double mean, double stddev) {
  if (stddev == 0.0) return mean;
  return std::normal_distribution<double>(mean, stddev)(engine_);
}

double RngStream::gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }

std::size_t RngStream::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("RngStream::index: empty range");
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::vector<double> RngStream::dirichlet(std::span<const double> alpha) {
  std::vector<double> w(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    w[i] = gamma(alpha[i]);
    total += w[i];
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  for (auto& x : w) x /= total;
  return w;
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // partial Fisher-Yates
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace fgr
