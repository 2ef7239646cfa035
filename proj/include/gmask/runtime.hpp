/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/runtime.hpp
 * \brief Runtime: per-terminal stepping, allowed-byte queries, and exact
 * token-mask computation over a tokenized vocabulary.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpda.hpp"
#include "kernels.hpp"

namespace gmask {

enum class Status : uint8_t { kAlive, kDead, kAccepted };

/*! \brief A runtime configuration: the stack (bottom first) plus status.
 * Invariant while alive: stack.back() == state. */
struct RuntimeConfig {
  StateId state = 0;
  Status status = Status::kAlive;
  std::vector<int32_t> stack;
};

class VocabError : public std::runtime_error {
 public:
  enum class Kind { kEmptyToken, kDuplicateToken };
  VocabError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/*! \brief Byte trie over the vocabulary; shared prefixes are walked once. */
class TokenTrie {
 public:
  struct Node {
    int32_t token = -1;        // token id ending here, -1 otherwise
    int32_t first_child = -1;  // children sorted by byte
    int32_t next_sibling = -1;
    uint8_t byte = 0;          // byte on the incoming edge
  };

  /*! \throws VocabError on empty or duplicate tokens. */
  static TokenTrie Build(const std::vector<std::string>& tokens);

  const std::vector<Node>& nodes() const { return nodes_; }
  int32_t root() const { return 0; }
  int32_t num_tokens() const { return num_tokens_; }

 private:
  std::vector<Node> nodes_;
  int32_t num_tokens_ = 0;
};

/*! \brief Bit per token, plus one trailing bit for the end marker (eos). */
class TokenMask {
 public:
  explicit TokenMask(int32_t num_tokens = 0)
      : num_tokens_(num_tokens), bits_((static_cast<size_t>(num_tokens) + 1 + 63) / 64) {}

  void Set(int32_t token) { bits_[token / 64] |= uint64_t{1} << (token % 64); }
  bool Test(int32_t token) const { return bits_[token / 64] >> (token % 64) & 1; }
  void SetEos() { Set(num_tokens_); }
  bool TestEos() const { return Test(num_tokens_); }
  int32_t num_tokens() const { return num_tokens_; }
  int64_t CountSet() const;

  /*! \brief Lowercase hex, 4 bits per char, bit 0 of the mask in the first
   * char's least significant bit; covers num_tokens + 1 bits. */
  std::string ToHex() const;

  friend bool operator==(const TokenMask& a, const TokenMask& b) {
    return a.num_tokens_ == b.num_tokens_ && a.bits_ == b.bits_;
  }

 private:
  int32_t num_tokens_;
  std::vector<uint64_t> bits_;
};

/*!
 * \brief Execution engine over a compiled automaton. Stepping scans the
 * state's edges in arbitration order and applies the first whose stack
 * condition matches and whose accepted set contains the terminal.
 */
class Engine {
 public:
  explicit Engine(Dpda dpda, const Kernels* kernels = nullptr);

  const Dpda& dpda() const { return dpda_; }
  const Kernels& kernels() const { return *kernels_; }

  RuntimeConfig InitialConfig() const;

  /*! \brief Advances by one terminal (byte or kEndMarker). Returns false and
   * marks the config dead when no edge applies. */
  bool Step(RuntimeConfig* cfg, SymbolId terminal) const;

  /*! \brief Exact one-step viability: all bytes (and possibly the end
   * marker) some edge accepts under the current stack. */
  TerminalSet AllowedTerminals(const RuntimeConfig& cfg) const;

  struct RunResult {
    bool accepted = false;
    int64_t reject_offset = -1;  // offending byte index; input size for $
    int64_t steps = 0;           // edges applied
  };
  /*! \brief Runs a whole string plus end marker. With `use_composites` the
   * runner consumes two terminals at once through merged edges when able. */
  RunResult RunSequence(const RuntimeConfig& start, const std::string& input,
                        bool use_composites) const;

  /*! \brief Exact token mask via trie walk with in-place undo; subtrees
   * behind a dead byte are skipped without materializing configurations. */
  TokenMask ComputeMask(const RuntimeConfig& cfg, const TokenTrie& trie) const;

  /*! \brief Reference mask: replays every token from scratch. */
  TokenMask ComputeMaskNaive(const RuntimeConfig& cfg,
                             const std::vector<std::string>& tokens) const;

 private:
  struct StepUndo {
    StateId old_state;
    Status old_status;
    std::vector<int32_t> popped;
    int32_t pushed = 0;
  };

  /*! \brief Index into EdgesOf(state) of the first applicable edge, or -1. */
  int32_t FindEdge(const RuntimeConfig& cfg, SymbolId terminal) const;
  void Apply(RuntimeConfig* cfg, const PrefixConditionedEdge& e, SymbolId terminal,
             StepUndo* undo) const;
  void Undo(RuntimeConfig* cfg, StepUndo* undo) const;

  struct MaskWalk;
  void WalkTrie(MaskWalk* walk, int32_t node) const;

  Dpda dpda_;
  const Kernels* kernels_;

  // Per-state SoA blocks for the kernels.
  struct EdgeBlock {
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
  std::vector<EdgeBlock> blocks_;
};

}  // namespace gmask
