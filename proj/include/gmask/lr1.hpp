/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/lr1.hpp
 * \brief Canonical LR(1) item sets, the transition graph, and parse tables.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grammar.hpp"

namespace gmask {

using StateId = int32_t;

class BuildError : public std::runtime_error {
 public:
  enum class Kind { kNotLR1Conflict, kStateExplosion, kOverlappingCycles, kDivergentReduction };

  BuildError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/*! \brief An LR(1) item [A -> alpha . beta, a] identified by production, dot, lookahead. */
struct LR1Item {
  int32_t production;
  int32_t dot;
  SymbolId lookahead;  // byte terminal or kEndMarker

  friend bool operator==(const LR1Item& a, const LR1Item& b) {
    return a.production == b.production && a.dot == b.dot && a.lookahead == b.lookahead;
  }
};

/*!
 * \brief A set of LR(1) items, stored as (production, dot) cores with a
 * lookahead terminal set per core. Cores are kept sorted so equality and
 * hashing are canonical.
 */
class ItemSet {
 public:
  struct Core {
    int32_t production;
    int32_t dot;
    friend bool operator==(const Core& a, const Core& b) {
      return a.production == b.production && a.dot == b.dot;
    }
    friend bool operator<(const Core& a, const Core& b) {
      return a.production != b.production ? a.production < b.production : a.dot < b.dot;
    }
  };

  /*! \brief Adds lookaheads for a core; returns whether the set changed. */
  bool Add(Core core, const TerminalSet& lookaheads);
  bool AddItem(const LR1Item& item);

  bool Contains(const LR1Item& item) const;
  bool Empty() const { return cores_.empty(); }

  size_t NumCores() const { return cores_.size(); }
  const Core& CoreAt(size_t i) const { return cores_[i]; }
  const TerminalSet& LookaheadsAt(size_t i) const { return lookaheads_[i]; }
  /*! \brief Lookahead set of a core, or nullptr when the core is absent. */
  const TerminalSet* LookaheadsOf(const Core& core) const {
    int idx = FindCore(core);
    return idx < 0 ? nullptr : &lookaheads_[idx];
  }

  /*! \brief Total item count, one per (core, lookahead terminal). */
  size_t ItemCount() const;

  /*! \brief Enumerates items individually, lookaheads in byte order then $. */
  std::vector<LR1Item> Items() const;

  size_t Hash() const;
  friend bool operator==(const ItemSet& a, const ItemSet& b) {
    return a.cores_ == b.cores_ && a.lookaheads_ == b.lookaheads_;
  }

 private:
  int FindCore(const Core& core) const;  // -1 when absent

  std::vector<Core> cores_;            // sorted
  std::vector<TerminalSet> lookaheads_;  // parallel to cores_
};

/*!
 * \brief CLOSURE: least superset closed under adding [B -> .gamma, b] for
 * every [A -> alpha . B beta, a] and b in FIRST(beta a).
 */
ItemSet Closure(const Grammar& g, const FirstSets& f, ItemSet items);

/*! \brief GOTO: advance the dot over X in all items that expect X, then close. */
ItemSet GotoSet(const Grammar& g, const FirstSets& f, const ItemSet& items, SymbolId x);

struct Transition {
  SymbolId symbol;
  StateId target;
};

/*! \brief A reduction obligation (production, lookahead terminal) at a state. */
struct Reduction {
  int32_t production;
  SymbolId lookahead;
};

/*!
 * \brief The canonical LR(1) collection: states are deduplicated item sets,
 * numbered by BFS from closure({[S' -> .S, $]}); per state, outgoing
 * transitions are explored with byte terminals ascending, then nonterminals
 * in declaration order.
 */
class TransitionGraph {
 public:
  StateId num_states() const { return static_cast<StateId>(states_.size()); }
  const ItemSet& state(StateId s) const { return states_[s]; }
  StateId initial_state() const { return 0; }

  /*! \brief Target of the (state, symbol) transition, or -1. */
  StateId TransitionTarget(StateId s, SymbolId x) const;
  const std::vector<Transition>& Transitions(StateId s) const { return transitions_[s]; }
  const std::vector<Reduction>& Reductions(StateId s) const { return reductions_[s]; }

  /*! \brief States with any transition into s, ascending, any symbol. */
  const std::vector<StateId>& Predecessors(StateId s) const { return predecessors_[s]; }

  /*!
   * \brief The symbol labelling every transition into s (-1 for the initial
   * state). All inbound transitions of an LR state carry the same symbol.
   */
  SymbolId AccessingSymbol(StateId s) const { return accessing_symbol_[s]; }

  /*! \brief State containing [S' -> S., $], the accept state. */
  StateId accept_state() const { return accept_state_; }

  friend TransitionGraph BuildCanonicalCollection(const Grammar& g, const FirstSets& f,
                                                  int64_t state_ceiling);

 private:
  std::vector<ItemSet> states_;
  std::vector<std::vector<Transition>> transitions_;  // symbol-sorted per state
  std::vector<std::vector<Reduction>> reductions_;
  std::vector<std::vector<StateId>> predecessors_;
  std::vector<SymbolId> accessing_symbol_;
  StateId accept_state_ = -1;
};

constexpr int64_t kDefaultStateCeiling = 1000000;

/*!
 * \brief Worklist fixpoint from the initial closure.
 * \throws BuildError kStateExplosion when the state count passes the ceiling.
 */
TransitionGraph BuildCanonicalCollection(const Grammar& g, const FirstSets& f,
                                         int64_t state_ceiling = kDefaultStateCeiling);

struct Action {
  enum class Type : uint8_t { kError, kShift, kReduce, kAccept };
  Type type = Type::kError;
  int32_t value = 0;  // shift target or reduce production

  friend bool operator==(const Action& a, const Action& b) {
    return a.type == b.type && a.value == b.value;
  }
};

/*! \brief ACTION/GOTO tables; terminals indexed 0..255 plus $ at index 256. */
class ParseTables {
 public:
  ParseTables(StateId num_states, int32_t num_nonterminals)
      : actions_(static_cast<size_t>(num_states) * 257),
        gotos_(static_cast<size_t>(num_states) * num_nonterminals, -1),
        num_nonterminals_(num_nonterminals) {}

  const Action& ActionAt(StateId s, SymbolId terminal) const {
    return actions_[static_cast<size_t>(s) * 257 + terminal];
  }
  StateId GotoAt(StateId s, SymbolId nonterminal) const {
    return gotos_[static_cast<size_t>(s) * num_nonterminals_ + (nonterminal - kFirstNonterminal)];
  }

  Action& MutableAction(StateId s, SymbolId terminal) {
    return actions_[static_cast<size_t>(s) * 257 + terminal];
  }
  StateId& MutableGoto(StateId s, SymbolId nonterminal) {
    return gotos_[static_cast<size_t>(s) * num_nonterminals_ + (nonterminal - kFirstNonterminal)];
  }

 private:
  std::vector<Action> actions_;
  std::vector<StateId> gotos_;
  int32_t num_nonterminals_;
};

/*!
 * \brief Fills ACTION/GOTO from the graph.
 * \throws BuildError kNotLR1Conflict naming the state, terminal, and the
 *         conflicting entries.
 */
ParseTables BuildTables(const Grammar& g, const TransitionGraph& tg);

}  // namespace gmask
