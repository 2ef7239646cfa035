/*!
 *  Copyright (c) 2026 by Contributors
 * \file runtime.cpp
 */
#include "gmask/runtime.hpp"

#include <algorithm>
#include <cassert>

#include "gmask/grammar.hpp"

namespace gmask {

// ---------------------------------------------------------------------------
// TokenTrie
// ---------------------------------------------------------------------------

TokenTrie TokenTrie::Build(const std::vector<std::string>& tokens) {
  TokenTrie trie;
  trie.nodes_.push_back(Node{});  // root; its byte field is unused
  for (size_t id = 0; id < tokens.size(); ++id) {
    const std::string& tok = tokens[id];
    if (tok.empty()) {
      throw VocabError(VocabError::Kind::kEmptyToken,
                       "EmptyToken: token " + std::to_string(id) + " has no bytes");
    }
    int32_t cur = trie.root();
    for (char ch : tok) {
      uint8_t b = static_cast<uint8_t>(ch);
      // Siblings are kept sorted by byte so walks are deterministic.
      int32_t prev = -1;
      int32_t child = trie.nodes_[cur].first_child;
      while (child != -1 && trie.nodes_[child].byte < b) {
        prev = child;
        child = trie.nodes_[child].next_sibling;
      }
      if (child == -1 || trie.nodes_[child].byte != b) {
        int32_t fresh = static_cast<int32_t>(trie.nodes_.size());
        Node node;
        node.byte = b;
        node.next_sibling = child;
        trie.nodes_.push_back(node);
        if (prev == -1) {
          trie.nodes_[cur].first_child = fresh;
        } else {
          trie.nodes_[prev].next_sibling = fresh;
        }
        child = fresh;
      }
      cur = child;
    }
    if (trie.nodes_[cur].token != -1) {
      throw VocabError(VocabError::Kind::kDuplicateToken,
                       "DuplicateToken: tokens " + std::to_string(trie.nodes_[cur].token) +
                           " and " + std::to_string(id) + " are identical");
    }
    trie.nodes_[cur].token = static_cast<int32_t>(id);
  }
  trie.num_tokens_ = static_cast<int32_t>(tokens.size());
  return trie;
}

// ---------------------------------------------------------------------------
// TokenMask
// ---------------------------------------------------------------------------

int64_t TokenMask::CountSet() const {
  int64_t n = 0;
  for (uint64_t w : bits_) n += __builtin_popcountll(w);
  return n;
}

std::string TokenMask::ToHex() const {
  int32_t nbits = num_tokens_ + 1;
  int32_t nchars = (nbits + 3) / 4;
  std::string out(static_cast<size_t>(nchars), '0');
  for (int32_t i = 0; i < nchars; ++i) {
    uint32_t nibble = 0;
    for (int32_t j = 0; j < 4; ++j) {
      int32_t bit = i * 4 + j;
      if (bit < nbits && Test(bit)) nibble |= 1u << j;
    }
    out[i] = "0123456789abcdef"[nibble];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(Dpda dpda, const Kernels* kernels)
    : dpda_(std::move(dpda)), kernels_(kernels ? kernels : &ActiveKernels()) {
  blocks_.resize(dpda_.num_states);
  for (StateId s = 0; s < dpda_.num_states; ++s) {
    auto edges = dpda_.EdgesOf(s);
    EdgeBlock& block = blocks_[s];
    size_t max_len = 1;
    for (const auto& e : edges) max_len = std::max(max_len, e.match_pop.size());
    block.stride = static_cast<int32_t>((max_len + 7) / 8 * 8);
    block.cond.assign(edges.size() * block.stride, -1);
    block.cond_len.reserve(edges.size());
    block.accepted.reserve(edges.size() * 4);
    block.dollar.reserve(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      std::copy(e.match_pop.begin(), e.match_pop.end(), block.cond.begin() + i * block.stride);
      block.cond_len.push_back(static_cast<int32_t>(e.match_pop.size()));
      for (uint64_t w : e.accepted.bytes.words) block.accepted.push_back(w);
      block.dollar.push_back(e.accepted.end_marker ? 1 : 0);
    }
  }
}

RuntimeConfig Engine::InitialConfig() const {
  RuntimeConfig cfg;
  cfg.state = dpda_.initial_state;
  cfg.status = Status::kAlive;
  cfg.stack = {dpda_.initial_state};
  return cfg;
}

static bool ConditionMatches(const std::vector<int32_t>& stack,
                             const std::vector<StateId>& match_pop) {
  size_t k = match_pop.size();
  if (stack.size() < k) return false;
  for (size_t i = 0; i < k; ++i) {
    if (stack[stack.size() - 1 - i] != match_pop[i]) return false;
  }
  return true;
}

static bool Accepts(const TerminalSet& ts, SymbolId terminal) {
  if (terminal == kEndMarker) return ts.end_marker;
  return ts.bytes.Test(static_cast<uint8_t>(terminal));
}

int32_t Engine::FindEdge(const RuntimeConfig& cfg, SymbolId terminal) const {
  auto edges = dpda_.EdgesOf(cfg.state);
  for (size_t i = 0; i < edges.size(); ++i) {
    if (!Accepts(edges[i].accepted, terminal)) continue;
    if (!ConditionMatches(cfg.stack, edges[i].match_pop)) continue;
    return static_cast<int32_t>(i);
  }
  return -1;
}

void Engine::Apply(RuntimeConfig* cfg, const PrefixConditionedEdge& e, SymbolId terminal,
                   StepUndo* undo) const {
  size_t k = e.match_pop.size();
  if (undo) {
    undo->old_state = cfg->state;
    undo->old_status = cfg->status;
    undo->popped.assign(cfg->stack.end() - static_cast<int64_t>(k), cfg->stack.end());
  }
  cfg->stack.resize(cfg->stack.size() - k);
  cfg->stack.insert(cfg->stack.end(), e.push.begin(), e.push.end());
  int32_t pushed = static_cast<int32_t>(e.push.size());
  if (e.push_shift_target) {
    StateId t = dpda_.ShiftTarget(cfg->stack.back(), static_cast<uint8_t>(terminal));
    assert(t >= 0);
    cfg->stack.push_back(t);
    ++pushed;
  }
  if (undo) undo->pushed = pushed;
  cfg->state = cfg->stack.back();
  if (terminal == kEndMarker) cfg->status = Status::kAccepted;
}

void Engine::Undo(RuntimeConfig* cfg, StepUndo* undo) const {
  cfg->stack.resize(cfg->stack.size() - undo->pushed);
  cfg->stack.insert(cfg->stack.end(), undo->popped.begin(), undo->popped.end());
  cfg->state = undo->old_state;
  cfg->status = undo->old_status;
}

bool Engine::Step(RuntimeConfig* cfg, SymbolId terminal) const {
  if (cfg->status != Status::kAlive) return false;
  int32_t idx = FindEdge(*cfg, terminal);
  if (idx < 0) {
    cfg->status = Status::kDead;
    return false;
  }
  Apply(cfg, dpda_.EdgesOf(cfg->state)[idx], terminal, nullptr);
  return true;
}

TerminalSet Engine::AllowedTerminals(const RuntimeConfig& cfg) const {
  TerminalSet out;
  if (cfg.status != Status::kAlive) return out;
  const EdgeBlock& block = blocks_[cfg.state];
  EdgeBlockView view = block.View();
  if (view.num_edges == 0) return out;

  std::vector<int32_t> top(static_cast<size_t>(view.cond_stride), -1);
  size_t depth = std::min(cfg.stack.size(), static_cast<size_t>(view.cond_stride));
  for (size_t i = 0; i < depth; ++i) top[i] = cfg.stack[cfg.stack.size() - 1 - i];

  std::vector<uint64_t> match(static_cast<size_t>((view.num_edges + 63) / 64), 0);
  kernels_->match_conditions(top.data(), view, match.data());

  uint64_t bytes[4] = {0, 0, 0, 0};
  bool dollar = false;
  kernels_->union_allowed(view, match.data(), bytes, &dollar);
  for (size_t i = 0; i < 4; ++i) out.bytes.words[i] = bytes[i];
  out.end_marker = dollar;
  return out;
}

// ---------------------------------------------------------------------------
// Sequence running
// ---------------------------------------------------------------------------

Engine::RunResult Engine::RunSequence(const RuntimeConfig& start, const std::string& input,
                                      bool use_composites) const {
  RunResult res;
  RuntimeConfig cfg = start;
  int64_t n = static_cast<int64_t>(input.size());
  int64_t i = 0;
  while (cfg.status == Status::kAlive) {
    SymbolId t1 = i < n ? static_cast<uint8_t>(input[i]) : kEndMarker;
    if (use_composites && t1 != kEndMarker) {
      SymbolId t2 = i + 1 < n ? static_cast<uint8_t>(input[i + 1]) : kEndMarker;
      bool took_composite = false;
      for (const auto& c : dpda_.CompositesOf(cfg.state)) {
        if (!Accepts(c.accepted, t1) || !Accepts(c.accepted_second, t2)) continue;
        if (!ConditionMatches(cfg.stack, c.match_pop)) continue;
        Apply(&cfg, c, t2 == kEndMarker ? kEndMarker : t1, nullptr);
        ++res.steps;
        i += 2;
        took_composite = true;
        break;
      }
      if (took_composite) continue;
    }
    if (!Step(&cfg, t1)) break;
    ++res.steps;
    if (t1 == kEndMarker) break;
    ++i;
  }
  if (cfg.status == Status::kAccepted) {
    res.accepted = true;
    res.reject_offset = -1;
  } else {
    res.accepted = false;
    res.reject_offset = i;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Token masks
// ---------------------------------------------------------------------------

struct Engine::MaskWalk {
  const TokenTrie* trie;
  RuntimeConfig cfg;
  TokenMask mask;
};

void Engine::WalkTrie(MaskWalk* walk, int32_t node) const {
  const auto& nodes = walk->trie->nodes();
  int32_t token = nodes[node].token;
  if (token != -1) walk->mask.Set(token);
  if (nodes[node].first_child == -1) return;

  TerminalSet allowed = AllowedTerminals(walk->cfg);
  for (int32_t child = nodes[node].first_child; child != -1; child = nodes[child].next_sibling) {
    uint8_t b = nodes[child].byte;
    if (!allowed.bytes.Test(b)) continue;  // dead subtree: never materialized
    int32_t idx = FindEdge(walk->cfg, b);
    assert(idx >= 0);  // allowed set is exact
    StepUndo undo;
    Apply(&walk->cfg, dpda_.EdgesOf(walk->cfg.state)[idx], b, &undo);
    WalkTrie(walk, child);
    Undo(&walk->cfg, &undo);
  }
}

TokenMask Engine::ComputeMask(const RuntimeConfig& cfg, const TokenTrie& trie) const {
  MaskWalk walk{&trie, cfg, TokenMask(trie.num_tokens())};
  if (cfg.status == Status::kAlive) {
    WalkTrie(&walk, trie.root());
    if (AllowedTerminals(cfg).end_marker) walk.mask.SetEos();
  }
  return walk.mask;
}

TokenMask Engine::ComputeMaskNaive(const RuntimeConfig& cfg,
                                   const std::vector<std::string>& tokens) const {
  TokenMask mask(static_cast<int32_t>(tokens.size()));
  if (cfg.status != Status::kAlive) return mask;
  for (size_t id = 0; id < tokens.size(); ++id) {
    RuntimeConfig probe = cfg;
    bool alive = true;
    for (char ch : tokens[id]) {
      if (!Step(&probe, static_cast<uint8_t>(ch))) {
        alive = false;
        break;
      }
    }
    if (alive) mask.Set(static_cast<int32_t>(id));
  }
  RuntimeConfig probe = cfg;
  if (Step(&probe, kEndMarker)) mask.SetEos();
  return mask;
}

}  // namespace gmask
