#pragma once

#include "fgr/numeric.hpp"
#include "fgr/vocab.hpp"

#include <cstdint>

namespace fgr {

inline constexpr std::uint64_t kTextEncoderSeed = 0x7e47e5c0deULL;

/// Fixed bag-of-token-embeddings encoder. The table is a pure function of
/// (vocab_size, dim, seed) and is never trained.
class FrozenTextEncoder {
 public:
  FrozenTextEncoder(int vocab_size, int dim = 32, std::uint64_t seed = kTextEncoderSeed);

  int dim() const { return static_cast<int>(table_.cols()); }
  int vocab_size() const { return static_cast<int>(table_.rows()); }

  /// Mean of token embeddings, skipping pad/end. Zero vector when nothing remains.
  Vec encode(const TokenSeq& tokens) const;

 private:
  Mat table_;
};

}  // namespace fgr
