/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/dpda.hpp
 * \brief Deterministic pushdown automaton with prefix-conditioned edges.
 *
 * The automaton stores LR state ids on its stack; the stack top always equals
 * the current state. Each edge carries a stack condition (`match_pop`, the
 * exact suffix it consumes, top first) and a replacement (`push`, bottom
 * first), so a whole reduce* + shift chain of the LR automaton becomes a
 * single edge. Arbitration between matching edges is longest condition first,
 * with stack-rewrite (cycle back) edges outranking plain shifts of the same
 * condition length.
 *
 * Edge kinds:
 *  - acceptance: a direct shift, condition `[s]`, pushes the shift target;
 *  - reduction: a reduce chain ending in a shift of the accepted terminal
 *    (or in accept for `$`), condition deep enough to decide every reduce;
 *  - cycle back: rewrites the stack when a pure-shift circuit would repeat,
 *    keeping stack depth bounded on right-recursive repetition;
 *  - merged: a two-terminal composite used only by the sequence runner.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grammar.hpp"
#include "lr1.hpp"

namespace gmask {

struct PrefixConditionedEdge {
  enum class Origin : uint8_t { kAcceptance, kReduction, kCycleBack, kMerged };

  StateId source = -1;
  /*! \brief Terminals this edge consumes (bytes and/or the end marker). */
  TerminalSet accepted;
  /*! \brief Stack suffix required and removed, top first; front() == source. */
  std::vector<StateId> match_pop;
  /*! \brief States pushed in order (bottom first). */
  std::vector<StateId> push;
  /*! \brief Resulting state; the final pushed entry, or -1 when dynamic. */
  StateId target = -1;
  Origin origin = Origin::kAcceptance;
  /*!
   * \brief Dynamic target: after pushing `push` (a prefix), the consumed
   * byte's shift target from the then-exposed top is pushed and becomes the
   * state. Produced by edge aggregation so one edge can serve terminals
   * with distinct successor states.
   */
  bool push_shift_target = false;
  /*! \brief Second consumed terminal; only populated for kMerged. */
  TerminalSet accepted_second;

  /*! \brief Arbitration rank; lower fires first. */
  friend bool EdgeOrderBefore(const PrefixConditionedEdge& a, const PrefixConditionedEdge& b);
};

/*! \brief A pure-shift circuit in the transition graph, bottom first.
 * `states[0]` is the circuit state entered first (canonical rotation:
 * smallest id first); `closing_byte` shifts states.back() to states[0]. */
struct Cycle {
  std::vector<StateId> states;
  uint8_t closing_byte = 0;

  friend bool operator==(const Cycle& a, const Cycle& b) {
    return a.states == b.states && a.closing_byte == b.closing_byte;
  }
};

struct BuildOptions {
  bool aggregate = true;          // group shift-tailed edges (dynamic targets)
  bool merge = true;              // build two-terminal composites
  bool conservative_cycles = false;  // rewrite every elementary shift circuit
  int64_t state_ceiling = kDefaultStateCeiling;
  /*! \brief Edge budget = factor * states * 257; generation aborts past it. */
  int64_t edge_budget_factor = 100;
};

struct BuildStats {
  int64_t num_states = 0;
  int64_t num_acceptance = 0;
  int64_t num_reduction = 0;
  int64_t num_cycle_back = 0;
  int64_t num_merged = 0;
  int64_t aggregated_groups = 0;   // groups rewritten into dynamic edges
  int64_t edges_before_aggregation = 0;
};

/*!
 * \brief The compiled automaton. `edges` holds the single-terminal edges
 * sorted per state in arbitration order; `composites` holds merged edges,
 * consulted only by the sequence runner.
 */
struct Dpda {
  StateId num_states = 0;
  StateId initial_state = 0;
  StateId accept_state = -1;
  uint64_t grammar_hash = 0;
  /*! \brief Normalized grammar text (reparseable), for diagnostics. */
  std::string grammar_text;

  /*! \brief Byte shift targets, `state * 256 + byte`, -1 when absent. */
  std::vector<StateId> shift_targets;
  std::vector<PrefixConditionedEdge> edges;
  std::vector<int32_t> edge_begin;  // size num_states + 1
  std::vector<PrefixConditionedEdge> composites;
  std::vector<int32_t> composite_begin;  // size num_states + 1
  std::vector<Cycle> cycles;
  BuildStats stats;

  StateId ShiftTarget(StateId s, uint8_t b) const {
    return shift_targets[static_cast<size_t>(s) * 256 + b];
  }
  std::span<const PrefixConditionedEdge> EdgesOf(StateId s) const {
    return {edges.data() + edge_begin[s], edges.data() + edge_begin[s + 1]};
  }
  std::span<const PrefixConditionedEdge> CompositesOf(StateId s) const {
    return {composites.data() + composite_begin[s],
            composites.data() + composite_begin[s + 1]};
  }
};

/*!
 * \brief Finds the circuits that must be rewritten: runs trial reduction
 * chains and extracts pumping circuits (a chain revisiting the same
 * simulation state with a strictly deeper matched suffix), iterating until
 * no pump remains.
 * \throws BuildError kDivergentReduction when a pump's circuit contains a
 * nonterminal-accessed state (no sound rewrite exists), kOverlappingCycles
 * when two distinct circuits share a state.
 *
 * With `conservative_cycles` every elementary circuit of the byte-transition
 * graph is rewritten instead. That variant is NOT language preserving for
 * center-recursive grammars (it forgets nesting depth); it exists for
 * differential debugging only.
 */
std::vector<Cycle> DetectCycles(const Grammar& g, const TransitionGraph& tg,
                                const ParseTables& tables, const BuildOptions& options);

/*! \brief Emits one shift edge per (state, byte) transition. */
void AddAcceptanceEdges(const TransitionGraph& tg, Dpda* out);

/*! \brief Emits one cycle-back edge per circuit (at the circuit's last state). */
void ApplyCycleBackEdges(const std::vector<Cycle>& cycles, Dpda* out);

/*!
 * \brief Simulates every reduce chain symbolically and emits one edge per
 * surviving branch. Branches enumerate graph predecessors whenever a reduce
 * needs stack entries below the matched suffix; a branch dies when the chain
 * hits an error action or its matched suffix would contain a rewritten
 * circuit followed by its own first state (such stacks are unreachable once
 * cycle-back edges are installed).
 * \throws BuildError kDivergentReduction on an unrewritten pump or when the
 * chain/depth budget is exceeded, kStateExplosion past the edge budget.
 */
void GenerateReductionEdges(const Grammar& g, const TransitionGraph& tg,
                            const ParseTables& tables, const std::vector<Cycle>& cycles,
                            const BuildOptions& options, Dpda* out);

/*!
 * \brief Checks per-state arbitration is unambiguous: no two edges with the
 * same condition vector and rank class accept a common terminal, and every
 * edge is internally well formed (condition starts at its source, dynamic
 * edges have resolvable targets for each accepted byte).
 * \throws BuildError kNotLR1Conflict (message prefix "NondeterministicEdges")
 * when violated; this indicates an internal bug, not a grammar property.
 */
void ValidateDeterminism(const Dpda& dpda);

/*! \brief Sorts edges per state in arbitration order and rebuilds ranges. */
void FinalizeEdgeOrder(Dpda* dpda);

/*! \brief Stable FNV-1a hash of the normalized grammar text. */
uint64_t HashGrammarText(const std::string& normalized);

/*!
 * \brief Full pipeline: augment (if needed), tables, cycle detection, edge
 * generation, optimization passes per options, validation, ordering.
 */
Dpda BuildDpda(const Grammar& g, const BuildOptions& options = {});

}  // namespace gmask
