/*!
 *  Copyright (c) 2026 by Contributors
 * \file kernels/kernels_avx2.cpp
 * \brief AVX2 kernels: eight condition entries are compared per instruction
 * and accepted sets are unioned as full 256-bit registers.
 */
#include "gmask/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace gmask {

namespace {

void MatchConditionsAvx2(const int32_t* top, const EdgeBlockView& block,
                         uint64_t* out_match) {
  int32_t words = (block.num_edges + 63) / 64;
  for (int32_t w = 0; w < words; ++w) out_match[w] = 0;
  for (int32_t e = 0; e < block.num_edges; ++e) {
    const int32_t* cond = block.cond + static_cast<int64_t>(e) * block.cond_stride;
    int32_t len = block.cond_len[e];
    bool ok = true;
    for (int32_t base = 0; base < len && ok; base += 8) {
      __m256i c = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cond + base));
      __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(top + base));
      uint32_t eq = static_cast<uint32_t>(
          _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(c, t))));
      int32_t need = len - base < 8 ? len - base : 8;
      uint32_t want = (need == 8) ? 0xffu : ((1u << need) - 1);
      ok = (eq & want) == want;
    }
    if (ok) out_match[e / 64] |= uint64_t{1} << (e % 64);
  }
}

void UnionAllowedAvx2(const EdgeBlockView& block, const uint64_t* match,
                      uint64_t out_bytes[4], bool* out_dollar) {
  __m256i acc = _mm256_setzero_si256();
  bool dollar = false;
  for (int32_t e = 0; e < block.num_edges; ++e) {
    if ((match[e / 64] >> (e % 64) & 1) == 0) continue;
    __m256i a = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(block.accepted + static_cast<int64_t>(e) * 4));
    acc = _mm256_or_si256(acc, a);
    dollar = dollar || block.dollar[e] != 0;
  }
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out_bytes), acc);
  *out_dollar = dollar;
}

}  // namespace

const Kernels& Avx2Kernels() {
  static const Kernels k{MatchConditionsAvx2, UnionAllowedAvx2, "avx2"};
  return k;
}

}  // namespace gmask

#endif  // x86_64
