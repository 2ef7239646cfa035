/*!
 *  Copyright (c) 2026 by Contributors
 * \file src/lr1.cpp
 */
#include "gmask/lr1.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace gmask {

bool ItemSet::Add(Core core, const TerminalSet& lookaheads) {
  if (lookaheads.Empty()) return false;
  int idx = FindCore(core);
  if (idx < 0) {
    auto pos = std::lower_bound(cores_.begin(), cores_.end(), core);
    size_t i = static_cast<size_t>(pos - cores_.begin());
    cores_.insert(pos, core);
    TerminalSet la = lookaheads;
    la.epsilon = false;
    lookaheads_.insert(lookaheads_.begin() + i, la);
    return true;
  }
  return lookaheads_[idx].MergeTerminals(lookaheads);
}

bool ItemSet::AddItem(const LR1Item& item) {
  TerminalSet la;
  if (item.lookahead == kEndMarker) {
    la.end_marker = true;
  } else {
    la.bytes.Set(static_cast<uint8_t>(item.lookahead));
  }
  return Add(Core{item.production, item.dot}, la);
}

bool ItemSet::Contains(const LR1Item& item) const {
  int idx = FindCore(Core{item.production, item.dot});
  if (idx < 0) return false;
  if (item.lookahead == kEndMarker) return lookaheads_[idx].end_marker;
  return lookaheads_[idx].bytes.Test(static_cast<uint8_t>(item.lookahead));
}

size_t ItemSet::ItemCount() const {
  size_t n = 0;
  for (const TerminalSet& la : lookaheads_) n += static_cast<size_t>(la.Count());
  return n;
}

std::vector<LR1Item> ItemSet::Items() const {
  std::vector<LR1Item> out;
  out.reserve(ItemCount());
  for (size_t i = 0; i < cores_.size(); ++i) {
    const Core& c = cores_[i];
    lookaheads_[i].bytes.ForEach(
        [&](uint8_t b) { out.push_back(LR1Item{c.production, c.dot, b}); });
    if (lookaheads_[i].end_marker) out.push_back(LR1Item{c.production, c.dot, kEndMarker});
  }
  return out;
}

size_t ItemSet::Hash() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (size_t i = 0; i < cores_.size(); ++i) {
    mix(static_cast<uint64_t>(cores_[i].production) << 32 |
        static_cast<uint32_t>(cores_[i].dot));
    for (uint64_t w : lookaheads_[i].bytes.words) mix(w);
    mix(lookaheads_[i].end_marker ? 0x9e3779b97f4a7c15ull : 0x2545f4914f6cdd1dull);
  }
  return static_cast<size_t>(h);
}

int ItemSet::FindCore(const Core& core) const {
  auto it = std::lower_bound(cores_.begin(), cores_.end(), core);
  if (it == cores_.end() || !(*it == core)) return -1;
  return static_cast<int>(it - cores_.begin());
}

ItemSet Closure(const Grammar& g, const FirstSets& f, ItemSet items) {
  // Worklist of core indices whose lookaheads may need propagating.
  std::deque<ItemSet::Core> work;
  for (size_t i = 0; i < items.NumCores(); ++i) work.push_back(items.CoreAt(i));

  while (!work.empty()) {
    ItemSet::Core core = work.front();
    work.pop_front();
    const Production& p = g.production(core.production);
    if (core.dot >= static_cast<int32_t>(p.rhs.size())) continue;
    SymbolId next = p.rhs[core.dot];
    if (!IsNonterminal(next)) continue;

    // Lookaheads may have grown since this core was queued; read them fresh.
    const TerminalSet* la = items.LookaheadsOf(core);
    if (la == nullptr) continue;
    TerminalSet follow = f.FirstOfSequence(p.rhs.data() + core.dot + 1,
                                           p.rhs.size() - core.dot - 1, *la);
    follow.epsilon = false;
    for (int32_t prod : g.ProductionsOf(next)) {
      if (items.Add(ItemSet::Core{prod, 0}, follow)) {
        work.push_back(ItemSet::Core{prod, 0});
      }
    }
  }
  return items;
}

ItemSet GotoSet(const Grammar& g, const FirstSets& f, const ItemSet& items, SymbolId x) {
  ItemSet moved;
  for (size_t i = 0; i < items.NumCores(); ++i) {
    const ItemSet::Core& c = items.CoreAt(i);
    const Production& p = g.production(c.production);
    if (c.dot < static_cast<int32_t>(p.rhs.size()) && p.rhs[c.dot] == x) {
      moved.Add(ItemSet::Core{c.production, c.dot + 1}, items.LookaheadsAt(i));
    }
  }
  if (moved.Empty()) return moved;
  return Closure(g, f, std::move(moved));
}

namespace {

// Symbols after a dot anywhere in the set: byte terminals ascending first,
// then nonterminals in declaration order.
std::vector<SymbolId> OutgoingSymbols(const Grammar& g, const ItemSet& s) {
  ByteSet terminals;
  std::vector<bool> nonterminals(g.num_nonterminals(), false);
  for (size_t i = 0; i < s.NumCores(); ++i) {
    const ItemSet::Core& c = s.CoreAt(i);
    const Production& p = g.production(c.production);
    if (c.dot >= static_cast<int32_t>(p.rhs.size())) continue;
    SymbolId next = p.rhs[c.dot];
    if (IsByteTerminal(next)) {
      terminals.Set(static_cast<uint8_t>(next));
    } else {
      nonterminals[next - kFirstNonterminal] = true;
    }
  }
  std::vector<SymbolId> out;
  terminals.ForEach([&](uint8_t b) { out.push_back(b); });
  for (int32_t i = 0; i < g.num_nonterminals(); ++i) {
    if (nonterminals[i]) out.push_back(kFirstNonterminal + i);
  }
  return out;
}

}  // namespace

TransitionGraph BuildCanonicalCollection(const Grammar& g, const FirstSets& f,
                                         int64_t state_ceiling) {
  if (!g.augmented()) {
    throw std::logic_error("BuildCanonicalCollection requires an augmented grammar");
  }
  TransitionGraph tg;
  std::unordered_map<size_t, std::vector<StateId>> index;  // hash -> candidate ids

  auto find_state = [&](const ItemSet& s, size_t hash) -> StateId {
    auto it = index.find(hash);
    if (it == index.end()) return -1;
    for (StateId id : it->second) {
      if (tg.states_[id] == s) return id;
    }
    return -1;
  };

  ItemSet start;
  start.AddItem(LR1Item{g.augmented_production(), 0, kEndMarker});
  tg.states_.push_back(Closure(g, f, std::move(start)));
  tg.accessing_symbol_.push_back(-1);
  index[tg.states_[0].Hash()].push_back(0);

  std::deque<StateId> work;
  work.push_back(0);

  while (!work.empty()) {
    StateId s = work.front();
    work.pop_front();
    // states_ may grow (and reallocate) while expanding; copy the item set.
    ItemSet items = tg.states_[s];
    std::vector<Transition> transitions;
    for (SymbolId x : OutgoingSymbols(g, items)) {
      ItemSet next = GotoSet(g, f, items, x);
      size_t hash = next.Hash();
      StateId target = find_state(next, hash);
      if (target < 0) {
        target = tg.num_states();
        if (target >= state_ceiling) {
          std::ostringstream os;
          os << "StateExplosion: canonical collection exceeded ceiling of " << state_ceiling
             << " states";
          throw BuildError(BuildError::Kind::kStateExplosion, os.str());
        }
        tg.states_.push_back(std::move(next));
        tg.accessing_symbol_.push_back(x);
        index[hash].push_back(target);
        work.push_back(target);
      }
      transitions.push_back(Transition{x, target});
    }
    if (tg.transitions_.size() < static_cast<size_t>(tg.num_states())) {
      tg.transitions_.resize(tg.num_states());
    }
    tg.transitions_[s] = std::move(transitions);
  }
  tg.transitions_.resize(tg.num_states());

  tg.reductions_.resize(tg.num_states());
  tg.predecessors_.resize(tg.num_states());
  for (StateId s = 0; s < tg.num_states(); ++s) {
    const ItemSet& items = tg.states_[s];
    for (size_t i = 0; i < items.NumCores(); ++i) {
      const ItemSet::Core& c = items.CoreAt(i);
      const Production& p = g.production(c.production);
      if (c.dot != static_cast<int32_t>(p.rhs.size())) continue;
      if (c.production == g.augmented_production()) {
        tg.accept_state_ = s;
        continue;  // [S' -> S., $] is the accept obligation, not a reduction
      }
      items.LookaheadsAt(i).bytes.ForEach(
          [&](uint8_t b) { tg.reductions_[s].push_back(Reduction{c.production, b}); });
      if (items.LookaheadsAt(i).end_marker) {
        tg.reductions_[s].push_back(Reduction{c.production, kEndMarker});
      }
    }
    std::sort(tg.reductions_[s].begin(), tg.reductions_[s].end(),
              [](const Reduction& a, const Reduction& b) {
                return a.production != b.production ? a.production < b.production
                                                    : a.lookahead < b.lookahead;
              });
    for (const Transition& t : tg.transitions_[s]) {
      tg.predecessors_[t.target].push_back(s);
    }
  }
  for (auto& preds : tg.predecessors_) {
    std::sort(preds.begin(), preds.end());
    preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
  }
  return tg;
}

StateId TransitionGraph::TransitionTarget(StateId s, SymbolId x) const {
  for (const Transition& t : transitions_[s]) {
    if (t.symbol == x) return t.target;
  }
  return -1;
}

namespace {

std::string ActionDescription(const Grammar& g, const Action& a) {
  std::ostringstream os;
  switch (a.type) {
    case Action::Type::kShift:
      os << "shift to state " << a.value;
      break;
    case Action::Type::kReduce:
      os << "reduce by " << g.NonterminalName(g.production(a.value).lhs) << " (production "
         << a.value << ")";
      break;
    case Action::Type::kAccept:
      os << "accept";
      break;
    default:
      os << "error";
  }
  return os.str();
}

}  // namespace

ParseTables BuildTables(const Grammar& g, const TransitionGraph& tg) {
  ParseTables tables(tg.num_states(), g.num_nonterminals());

  auto set_action = [&](StateId s, SymbolId terminal, Action a) {
    Action& cell = tables.MutableAction(s, terminal);
    if (cell.type != Action::Type::kError && !(cell == a)) {
      std::ostringstream os;
      os << "NotLR1Conflict: state " << s << " on " << (terminal == kEndMarker ? std::string("$") : ByteName(static_cast<uint8_t>(terminal)))
         << ": " << ActionDescription(g, cell) << " vs " << ActionDescription(g, a);
      throw BuildError(BuildError::Kind::kNotLR1Conflict, os.str());
    }
    cell = a;
  };

  for (StateId s = 0; s < tg.num_states(); ++s) {
    for (const Transition& t : tg.Transitions(s)) {
      if (IsByteTerminal(t.symbol)) {
        set_action(s, t.symbol, Action{Action::Type::kShift, t.target});
      } else {
        tables.MutableGoto(s, t.symbol) = t.target;
      }
    }
    for (const Reduction& r : tg.Reductions(s)) {
      set_action(s, r.lookahead, Action{Action::Type::kReduce, r.production});
    }
    if (s == tg.accept_state()) {
      set_action(s, kEndMarker, Action{Action::Type::kAccept, 0});
    }
  }
  return tables;
}

}  // namespace gmask
