// Tests for the condition-matching and allowed-set union kernels: scalar
// reference behavior, and bit-for-bit equivalence of the vector variant
// whenever it is available on the host.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "gmask/kernels.hpp"

using namespace gmask;

namespace {

// Owning scratch version of an edge block.
struct Block {
  std::vector<int32_t> cond;
  std::vector<int32_t> cond_len;
  std::vector<uint64_t> accepted;
  std::vector<uint8_t> dollar;
  int32_t stride = 8;

  EdgeBlockView View() const {
    EdgeBlockView v;
    v.num_edges = static_cast<int32_t>(cond_len.size());
    v.cond_stride = stride;
    v.cond = cond.data();
    v.cond_len = cond_len.data();
    v.accepted = accepted.data();
    v.dollar = dollar.data();
    return v;
  }
};

Block RandomBlock(std::mt19937_64* rng, int32_t num_edges, int32_t stride) {
  Block b;
  b.stride = stride;
  b.cond.assign(static_cast<size_t>(num_edges) * stride, -1);
  for (int32_t e = 0; e < num_edges; ++e) {
    int32_t len = static_cast<int32_t>((*rng)() % (stride - 1)) + 1;
    b.cond_len.push_back(len);
    for (int32_t i = 0; i < len; ++i) {
      b.cond[static_cast<size_t>(e) * stride + i] = static_cast<int32_t>((*rng)() % 6);
    }
    for (int k = 0; k < 4; ++k) b.accepted.push_back((*rng)());
    b.dollar.push_back(static_cast<uint8_t>((*rng)() % 2));
  }
  return b;
}

std::vector<int32_t> RandomTop(std::mt19937_64* rng, int32_t stride, size_t depth) {
  std::vector<int32_t> top(static_cast<size_t>(stride), -1);
  for (size_t i = 0; i < depth && i < top.size(); ++i) {
    top[i] = static_cast<int32_t>((*rng)() % 6);
  }
  return top;
}

}  // namespace

TEST_CASE("scalar condition matching follows the prefix rule") {
  Block b;
  b.stride = 8;
  // Edge 0: needs top = [5, 1]; edge 1: needs top = [5]; edge 2: len 3.
  b.cond = {5, 1, -1, -1, -1, -1, -1, -1,   //
            5, -1, -1, -1, -1, -1, -1, -1,  //
            5, 1, 0, -1, -1, -1, -1, -1};
  b.cond_len = {2, 1, 3};
  b.accepted.assign(12, 0);
  b.dollar = {0, 0, 0};

  uint64_t match = 0;
  std::vector<int32_t> top = {5, 1, 0, -1, -1, -1, -1, -1};
  ScalarKernels().match_conditions(top.data(), b.View(), &match);
  CHECK(match == 0b111);

  top = {5, 2, 0, -1, -1, -1, -1, -1};
  ScalarKernels().match_conditions(top.data(), b.View(), &match);
  CHECK(match == 0b010);

  // A short stack: the -1 padding below the bottom fails deep conditions,
  // so only the one-entry condition holds.
  top = {5, -1, -1, -1, -1, -1, -1, -1};
  ScalarKernels().match_conditions(top.data(), b.View(), &match);
  CHECK(match == 0b010);

  top = {4, 1, 0, -1, -1, -1, -1, -1};
  ScalarKernels().match_conditions(top.data(), b.View(), &match);
  CHECK(match == 0);
}

TEST_CASE("scalar union honors the match bits") {
  Block b;
  b.stride = 8;
  b.cond.assign(2 * 8, -1);
  b.cond[0] = 1;
  b.cond[8] = 1;
  b.cond_len = {1, 1};
  b.accepted = {0x1, 0, 0, 0, /* edge 0 accepts byte 0 */
                0x2, 0, 0, 0 /* edge 1 accepts byte 1 */};
  b.dollar = {0, 1};

  uint64_t bytes[4];
  bool dollar = true;
  uint64_t match = 0b01;
  ScalarKernels().union_allowed(b.View(), &match, bytes, &dollar);
  CHECK(bytes[0] == 0x1);
  CHECK_FALSE(dollar);

  match = 0b11;
  ScalarKernels().union_allowed(b.View(), &match, bytes, &dollar);
  CHECK(bytes[0] == 0x3);
  CHECK(dollar);

  match = 0;
  ScalarKernels().union_allowed(b.View(), &match, bytes, &dollar);
  CHECK(bytes[0] == 0);
  CHECK(bytes[1] == 0);
  CHECK(bytes[2] == 0);
  CHECK(bytes[3] == 0);
  CHECK_FALSE(dollar);
}

TEST_CASE("vector kernels match the scalar reference on random blocks") {
  const Kernels& scalar = ScalarKernels();
  const Kernels& vec = Avx2Kernels();
  INFO("active kernel set: " << ActiveKernels().name);
  if (!Avx2Available()) {
    // Fallback wiring: without the vector unit both names are the same.
    CHECK(&vec == &scalar);
    return;
  }
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 400; ++trial) {
    int32_t stride = 8 * (1 + static_cast<int32_t>(rng() % 5));
    int32_t num_edges = 1 + static_cast<int32_t>(rng() % 130);
    Block b = RandomBlock(&rng, num_edges, stride);
    std::vector<int32_t> top = RandomTop(&rng, stride, rng() % (stride + 1));

    size_t words = static_cast<size_t>(num_edges + 63) / 64;
    std::vector<uint64_t> m_scalar(words, ~uint64_t{0});
    std::vector<uint64_t> m_vec(words, 0);
    scalar.match_conditions(top.data(), b.View(), m_scalar.data());
    vec.match_conditions(top.data(), b.View(), m_vec.data());
    REQUIRE(m_scalar == m_vec);

    uint64_t bs[4], bv[4];
    bool ds, dv;
    scalar.union_allowed(b.View(), m_scalar.data(), bs, &ds);
    vec.union_allowed(b.View(), m_vec.data(), bv, &dv);
    CHECK(std::memcmp(bs, bv, sizeof bs) == 0);
    CHECK(ds == dv);
  }
}

TEST_CASE("kernel selection reports a plausible active set") {
  const Kernels& active = ActiveKernels();
  REQUIRE(active.name != nullptr);
  std::string name = active.name;
  CHECK((name == "scalar" || name == "avx2"));
  if (Avx2Available()) {
    CHECK(name == "avx2");
  } else {
    CHECK(name == "scalar");
  }
  CHECK(active.match_conditions != nullptr);
  CHECK(active.union_allowed != nullptr);
}

TEST_CASE("a full sixty-four edge word and the tail word both work") {
  std::mt19937_64 rng(7);
  Block b = RandomBlock(&rng, 64 + 9, 8);
  std::vector<int32_t> top = RandomTop(&rng, 8, 4);
  std::vector<uint64_t> m_scalar(2, 0);
  ScalarKernels().match_conditions(top.data(), b.View(), m_scalar.data());
  // Bits past num_edges stay clear so unions never read ghost edges.
  CHECK((m_scalar[1] >> 9) == 0);
  if (Avx2Available()) {
    std::vector<uint64_t> m_vec(2, 0);
    Avx2Kernels().match_conditions(top.data(), b.View(), m_vec.data());
    CHECK(m_scalar == m_vec);
    CHECK((m_vec[1] >> 9) == 0);
  }
}
