/*!
 *  Copyright (c) 2026 by Contributors
 * \file kernels/kernels.cpp
 * \brief Scalar reference kernels and runtime dispatch.
 */
#include "gmask/kernels.hpp"

namespace gmask {

namespace {

void MatchConditionsScalar(const int32_t* top, const EdgeBlockView& block,
                           uint64_t* out_match) {
  int32_t words = (block.num_edges + 63) / 64;
  for (int32_t w = 0; w < words; ++w) out_match[w] = 0;
  for (int32_t e = 0; e < block.num_edges; ++e) {
    const int32_t* cond = block.cond + static_cast<int64_t>(e) * block.cond_stride;
    int32_t len = block.cond_len[e];
    bool ok = true;
    for (int32_t i = 0; i < len && ok; ++i) ok = cond[i] == top[i];
    if (ok) out_match[e / 64] |= uint64_t{1} << (e % 64);
  }
}

void UnionAllowedScalar(const EdgeBlockView& block, const uint64_t* match,
                        uint64_t out_bytes[4], bool* out_dollar) {
  out_bytes[0] = out_bytes[1] = out_bytes[2] = out_bytes[3] = 0;
  *out_dollar = false;
  for (int32_t e = 0; e < block.num_edges; ++e) {
    if ((match[e / 64] >> (e % 64) & 1) == 0) continue;
    const uint64_t* acc = block.accepted + static_cast<int64_t>(e) * 4;
    out_bytes[0] |= acc[0];
    out_bytes[1] |= acc[1];
    out_bytes[2] |= acc[2];
    out_bytes[3] |= acc[3];
    *out_dollar = *out_dollar || block.dollar[e] != 0;
  }
}

}  // namespace

const Kernels& ScalarKernels() {
  static const Kernels k{MatchConditionsScalar, UnionAllowedScalar, "scalar"};
  return k;
}

bool Avx2Available() {
#if defined(GMASK_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(_M_X64))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Kernels& ActiveKernels() {
  if (Avx2Available()) return Avx2Kernels();
  return ScalarKernels();
}

#if !defined(GMASK_HAVE_AVX2_TU)
const Kernels& Avx2Kernels() { return ScalarKernels(); }
#endif

}  // namespace gmask
