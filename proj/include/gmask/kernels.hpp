/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/kernels.hpp
 * \brief Hot-loop kernels for edge-condition matching and accepted-set
 * union, with a scalar reference implementation and an AVX2 variant chosen
 * at runtime. Both are always exported so tests can compare them.
 */
#pragma once

#include <cstdint>

namespace gmask {

/*!
 * \brief One state's edges in structure-of-arrays form.
 *
 * Conditions are stored top first, padded to `cond_stride` entries with -1;
 * thus every edge compares against the same top-first copy of the stack.
 * The caller provides that copy padded with -1 past the stack bottom, so a
 * condition deeper than the stack fails on its own (state ids are >= 0).
 */
struct EdgeBlockView {
  int32_t num_edges = 0;
  int32_t cond_stride = 0;        // multiple of 8
  const int32_t* cond = nullptr;  // num_edges * cond_stride
  const int32_t* cond_len = nullptr;
  const uint64_t* accepted = nullptr;  // 4 words per edge
  const uint8_t* dollar = nullptr;     // 1 when the edge accepts the end marker
};

struct Kernels {
  /*!
   * \brief Sets bit e of out_match (64 edges per word) iff edge e's condition
   * matches `top` (top-first stack copy, cond_stride entries, -1 padded).
   */
  void (*match_conditions)(const int32_t* top, const EdgeBlockView& block,
                           uint64_t* out_match);
  /*!
   * \brief ORs the accepted byte sets of all edges whose bit is set in
   * `match` into out_bytes[4]; sets *out_dollar if any matched edge accepts
   * the end marker.
   */
  void (*union_allowed)(const EdgeBlockView& block, const uint64_t* match,
                        uint64_t out_bytes[4], bool* out_dollar);
  const char* name;
};

const Kernels& ScalarKernels();
/*! \brief True when an AVX2 variant was compiled in and the CPU supports it. */
bool Avx2Available();
/*! \brief AVX2 kernels; only callable when Avx2Available(). */
const Kernels& Avx2Kernels();
/*! \brief Best available implementation for this process. */
const Kernels& ActiveKernels();

}  // namespace gmask
