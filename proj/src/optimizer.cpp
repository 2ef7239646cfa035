/*!
 *  Copyright (c) 2026 by Contributors
 * \file optimizer.cpp
 * \brief Edge aggregation (dynamic targets) and two-terminal merging.
 */
#include "gmask/optimizer.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

namespace gmask {

namespace {

/*! \brief Eligible for aggregation: single byte, static target that is the
 * byte's shift target from the state exposed under it. */
bool ShiftTailed(const Dpda& d, const PrefixConditionedEdge& e, uint8_t* byte) {
  if (e.push_shift_target || e.accepted.end_marker) return false;
  if (e.origin == PrefixConditionedEdge::Origin::kMerged) return false;
  if (e.accepted.bytes.Count() != 1) return false;
  if (e.push.size() < 2 || e.push.back() != e.target) return false;
  uint8_t b = 0;
  e.accepted.bytes.ForEach([&](uint8_t x) { b = x; });
  if (d.ShiftTarget(e.push[e.push.size() - 2], b) != e.target) return false;
  *byte = b;
  return true;
}

}  // namespace

int64_t AggregateEdges(Dpda* dpda) {
  using Key = std::tuple<StateId, int, std::vector<StateId>, std::vector<StateId>>;
  std::map<Key, std::vector<size_t>> groups;
  std::vector<uint8_t> byte_of(dpda->edges.size(), 0);
  for (size_t i = 0; i < dpda->edges.size(); ++i) {
    const PrefixConditionedEdge& e = dpda->edges[i];
    uint8_t b;
    if (!ShiftTailed(*dpda, e, &b)) continue;
    byte_of[i] = b;
    std::vector<StateId> prefix(e.push.begin(), e.push.end() - 1);
    groups[{e.source, static_cast<int>(e.origin), e.match_pop, prefix}].push_back(i);
  }

  std::vector<bool> drop(dpda->edges.size(), false);
  std::vector<PrefixConditionedEdge> added;
  int64_t rewritten = 0;
  for (auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    PrefixConditionedEdge merged;
    const PrefixConditionedEdge& first = dpda->edges[members.front()];
    merged.source = first.source;
    merged.match_pop = first.match_pop;
    merged.push.assign(first.push.begin(), first.push.end() - 1);
    merged.origin = first.origin;
    merged.push_shift_target = true;
    merged.target = -1;
    for (size_t i : members) {
      merged.accepted.bytes.Set(byte_of[i]);
      drop[i] = true;
    }
    added.push_back(std::move(merged));
    ++rewritten;
  }
  if (rewritten == 0) return 0;

  std::vector<PrefixConditionedEdge> kept;
  kept.reserve(dpda->edges.size());
  for (size_t i = 0; i < dpda->edges.size(); ++i) {
    if (!drop[i]) kept.push_back(std::move(dpda->edges[i]));
  }
  for (PrefixConditionedEdge& e : added) kept.push_back(std::move(e));
  dpda->edges = std::move(kept);
  return rewritten;
}

int64_t MergeEdges(Dpda* dpda) {
  dpda->composites.clear();
  // Count outgoing edges per state to find unique-successor states.
  std::vector<int32_t> out_count(dpda->num_states, 0);
  std::vector<int32_t> only_edge(dpda->num_states, -1);
  for (size_t i = 0; i < dpda->edges.size(); ++i) {
    const PrefixConditionedEdge& e = dpda->edges[i];
    out_count[e.source]++;
    only_edge[e.source] = static_cast<int32_t>(i);
  }

  // A composite must never preempt a cycle-collapse edge: when the full
  // circuit sits on the stack the collapse outranks the plain shift, and
  // skipping it would let the stack grow without bound. Any first edge whose
  // bytes overlap a collapse edge at the same state is therefore ineligible.
  std::vector<ByteSet> collapse_bytes(dpda->num_states);
  for (const PrefixConditionedEdge& e : dpda->edges) {
    if (e.origin == PrefixConditionedEdge::Origin::kCycleBack) {
      collapse_bytes[e.source] |= e.accepted.bytes;
    }
  }

  int64_t made = 0;
  for (const PrefixConditionedEdge& e1 : dpda->edges) {
    if (e1.push_shift_target || e1.accepted.end_marker) continue;
    if (e1.target < 0 || e1.target == dpda->accept_state) continue;
    if (out_count[e1.target] != 1) continue;
    ByteSet overlap = e1.accepted.bytes;
    overlap &= collapse_bytes[e1.source];
    if (!overlap.Empty()) continue;
    const PrefixConditionedEdge& e2 = dpda->edges[only_edge[e1.target]];
    if (e2.push_shift_target) continue;

    // e2's condition must agree with what e1 just pushed; any deeper demand
    // extends the composite's condition below e1's.
    const std::vector<StateId>& p2 = e2.match_pop;      // top first
    const std::vector<StateId>& q1 = e1.push;           // bottom first
    size_t k = std::min(p2.size(), q1.size());
    bool compatible = true;
    for (size_t i = 0; i < k && compatible; ++i) {
      compatible = p2[i] == q1[q1.size() - 1 - i];
    }
    if (!compatible) continue;

    PrefixConditionedEdge c;
    c.source = e1.source;
    c.origin = PrefixConditionedEdge::Origin::kMerged;
    c.accepted = e1.accepted;
    c.accepted_second = e2.accepted;
    c.match_pop = e1.match_pop;
    c.match_pop.insert(c.match_pop.end(), p2.begin() + static_cast<int64_t>(k), p2.end());
    c.push.assign(q1.begin(), q1.end() - static_cast<int64_t>(k));
    c.push.insert(c.push.end(), e2.push.begin(), e2.push.end());
    c.target = e2.target;
    dpda->composites.push_back(std::move(c));
    ++made;
  }
  return made;
}

}  // namespace gmask
