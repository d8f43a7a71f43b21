#include "fgr/text_encoder.hpp"

#include "fgr/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace fgr {

FrozenTextEncoder::FrozenTextEncoder(int vocab_size, int dim, std::uint64_t seed) : table_(vocab_size, dim) {
  if (vocab_size < 1 || dim < 1) throw std::invalid_argument("FrozenTextEncoder: sizes must be positive");
  RngStream rng(seed, Purpose::data);
  const double sd = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int v = 0; v < vocab_size; ++v)
    for (int d = 0; d < dim; ++d) table_(v, d) = rng.normal(0.0, sd);
}

Vec FrozenTextEncoder::encode(const TokenSeq& tokens) const {
  Vec acc = Vec::Zero(table_.cols());
  int used = 0;
  for (Token t : tokens) {
    if (t == kPad || t == kEnd) continue;
    if (t < 0 || t >= table_.rows()) throw std::out_of_range("FrozenTextEncoder: token " + std::to_string(t) + " out of vocabulary");
    acc += table_.row(t).transpose();
    ++used;
  }
  return used ? Vec(acc / used) : acc;
}

}  // namespace fgr
