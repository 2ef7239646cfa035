/*!
 *  Copyright (c) 2026 by Contributors
 * \file dpda_builder.cpp
 * \brief Edge generation: shift edges, symbolic reduce-chain simulation with
 * downward branching, pump detection, and cycle-back rewrites.
 */
#include "gmask/dpda.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "gmask/optimizer.hpp"

namespace gmask {

namespace {

/*! \brief Rank for arbitration: longer conditions first, then cycle-back
 * edges ahead of same-length rivals, then a stable syntactic order. */
int OriginRank(PrefixConditionedEdge::Origin o) {
  switch (o) {
    case PrefixConditionedEdge::Origin::kCycleBack: return 0;
    case PrefixConditionedEdge::Origin::kReduction: return 1;
    case PrefixConditionedEdge::Origin::kAcceptance: return 2;
    case PrefixConditionedEdge::Origin::kMerged: return 3;
  }
  return 4;
}

std::string DescribeStack(const std::vector<StateId>& v) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

/*!
 * One in-progress reduce chain. `matched` is the original-stack suffix the
 * chain has committed to, top first; `current` is the present stack content
 * from that suffix's depth upward, top first (its deepest entries coincide
 * with matched entries that were never popped). The full stack is always
 * (unknown deeper part) ++ reverse(current).
 */
struct ChainBranch {
  std::vector<StateId> matched;
  std::vector<StateId> current;
  StateId chain_state;
  /*! \brief One entry per applied reduce: (state, bottom, stack, depth). */
  std::vector<std::tuple<StateId, StateId, std::vector<StateId>, size_t>> history;
};

struct PumpReport {
  std::vector<StateId> circuit;  // bottom first, entry state first
};

/*! \brief Rotates so the smallest state leads, then reduces to the primitive
 * period if the word is a repetition. */
std::vector<StateId> CanonicalCircuit(std::vector<StateId> c) {
  for (size_t period = 1; period < c.size(); ++period) {
    if (c.size() % period != 0) continue;
    bool repeats = true;
    for (size_t i = period; i < c.size() && repeats; ++i) {
      repeats = c[i] == c[i - period];
    }
    if (repeats) {
      c.resize(period);
      break;
    }
  }
  size_t best = 0;
  for (size_t i = 1; i < c.size(); ++i) {
    if (c[i] < c[best]) best = i;
  }
  std::rotate(c.begin(), c.begin() + best, c.end());
  return c;
}

/*! \brief True when `bottom_first` contains the circuit followed by its own
 * first state as a contiguous segment (the stack pattern cycle-back edges
 * make unreachable). `bottom_first` must be the reversed matched suffix. */
bool ContainsForbiddenPattern(const std::vector<StateId>& bottom_first,
                              const std::vector<StateId>& circuit) {
  size_t n = circuit.size();
  if (bottom_first.size() < n + 1) return false;
  for (size_t start = 0; start + n + 1 <= bottom_first.size(); ++start) {
    bool hit = true;
    for (size_t i = 0; i < n && hit; ++i) hit = bottom_first[start + i] == circuit[i];
    if (hit && bottom_first[start + n] == circuit[0]) return true;
  }
  return false;
}

bool MatchedSuffixAllowed(const std::vector<StateId>& matched,
                          const std::vector<Cycle>& cycles) {
  if (cycles.empty()) return true;
  std::vector<StateId> bottom_first(matched.rbegin(), matched.rend());
  for (const Cycle& c : cycles) {
    if (ContainsForbiddenPattern(bottom_first, c.states)) return false;
  }
  return true;
}

/*!
 * Runs every reduce chain seeded at (state, lookahead) over the tables.
 * When `out` is non-null, emits one reduction edge per branch that ends in a
 * shift or accept. Pumping branches are reported through `pumps` if given;
 * otherwise they raise kDivergentReduction.
 */
class ChainSimulator {
 public:
  ChainSimulator(const Grammar& g, const TransitionGraph& tg, const ParseTables& tables,
                 const std::vector<Cycle>& cycles, const BuildOptions& options)
      : grammar_(g), tg_(tg), tables_(tables), cycles_(cycles), options_(options) {}

  void Run(Dpda* out, std::vector<PumpReport>* pumps) {
    edge_budget_ = options_.edge_budget_factor * static_cast<int64_t>(tg_.num_states()) * 257;
    depth_budget_ = static_cast<size_t>(tg_.num_states()) * 4 + 16;
    for (StateId s = 0; s < tg_.num_states(); ++s) {
      for (const Reduction& r : tg_.Reductions(s)) {
        Simulate(s, r.lookahead, out, pumps);
      }
    }
  }

 private:
  void Simulate(StateId seed, SymbolId lookahead, Dpda* out, std::vector<PumpReport>* pumps) {
    std::vector<ChainBranch> work;
    work.push_back(ChainBranch{{seed}, {seed}, seed, {}});
    while (!work.empty()) {
      ChainBranch br = std::move(work.back());
      work.pop_back();
      Step(seed, lookahead, std::move(br), &work, out, pumps);
    }
  }

  void Step(StateId seed, SymbolId lookahead, ChainBranch br,
            std::vector<ChainBranch>* work, Dpda* out, std::vector<PumpReport>* pumps) {
    const Action& a = tables_.ActionAt(br.chain_state, lookahead);
    switch (a.type) {
      case Action::Type::kError:
        return;  // this stack context never sees the lookahead; dead branch
      case Action::Type::kShift:
        Emit(seed, lookahead, br, a.value, out);
        return;
      case Action::Type::kAccept:
        Emit(seed, lookahead, br, -1, out);
        return;
      case Action::Type::kReduce:
        break;
    }
    const Production& p = grammar_.production(a.value);
    size_t r = p.rhs.size();
    // Deepen until the state under the popped handle is known.
    if (br.current.size() < r + 1) {
      if (br.matched.size() >= depth_budget_) {
        throw BuildError(BuildError::Kind::kDivergentReduction,
                         "DivergentReduction: reduce chain at state " +
                             std::to_string(seed) + " exceeded depth budget " +
                             std::to_string(depth_budget_));
      }
      for (StateId pred : tg_.Predecessors(br.matched.back())) {
        ChainBranch next = br;
        next.matched.push_back(pred);
        next.current.push_back(pred);
        if (!MatchedSuffixAllowed(next.matched, cycles_)) continue;
        work->push_back(std::move(next));
      }
      return;
    }
    // Pump check: same (chain state, matched bottom, stack) with a strictly
    // deeper matched suffix means the chain repeats forever.
    for (const auto& [hs, hbottom, hstack, hdepth] : br.history) {
      if (hs == br.chain_state && hbottom == br.matched.back() &&
          hstack == br.current && hdepth < br.matched.size()) {
        std::vector<StateId> segment(br.matched.begin() + static_cast<int64_t>(hdepth),
                                     br.matched.end());
        std::reverse(segment.begin(), segment.end());
        if (pumps) {
          pumps->push_back(PumpReport{std::move(segment)});
          return;  // prune; the rewrite pass will handle it
        }
        throw BuildError(BuildError::Kind::kDivergentReduction,
                         "DivergentReduction: unrewritten pump at state " +
                             std::to_string(seed) + " via circuit " +
                             DescribeStack(segment));
      }
    }
    br.history.emplace_back(br.chain_state, br.matched.back(), br.current,
                            br.matched.size());
    br.current.erase(br.current.begin(), br.current.begin() + static_cast<int64_t>(r));
    StateId exposed = br.current.front();
    StateId next = tg_.TransitionTarget(exposed, p.lhs);
    if (next < 0) return;  // impossible context
    br.current.insert(br.current.begin(), next);
    br.chain_state = next;
    if (br.current.size() > depth_budget_) {
      throw BuildError(BuildError::Kind::kDivergentReduction,
                       "DivergentReduction: simulated stack at state " +
                           std::to_string(seed) + " exceeded depth budget " +
                           std::to_string(depth_budget_));
    }
    work->push_back(std::move(br));
  }

  void Emit(StateId seed, SymbolId lookahead, const ChainBranch& br, StateId shift_target,
            Dpda* out) {
    if (out == nullptr) return;
    if (static_cast<int64_t>(out->edges.size()) >= edge_budget_) {
      throw BuildError(BuildError::Kind::kStateExplosion,
                       "StateExplosion: edge budget exceeded at " +
                           std::to_string(out->edges.size()) + " edges");
    }
    PrefixConditionedEdge e;
    e.source = seed;
    e.origin = PrefixConditionedEdge::Origin::kReduction;
    if (lookahead == kEndMarker) {
      e.accepted.end_marker = true;
    } else {
      e.accepted.bytes.Set(static_cast<uint8_t>(lookahead));
    }
    e.match_pop = br.matched;
    e.push.assign(br.current.rbegin(), br.current.rend());
    if (shift_target >= 0) {
      e.push.push_back(shift_target);
      e.target = shift_target;
    } else {
      e.target = tg_.accept_state();
    }
    out->edges.push_back(std::move(e));
    out->stats.num_reduction++;
  }

  const Grammar& grammar_;
  const TransitionGraph& tg_;
  const ParseTables& tables_;
  const std::vector<Cycle>& cycles_;
  const BuildOptions& options_;
  int64_t edge_budget_ = 0;
  size_t depth_budget_ = 0;
};

/*! \brief All elementary circuits of the byte-shift graph (conservative
 * mode), found per start state by DFS with a blocked set, canonicalized. */
std::vector<std::vector<StateId>> ElementaryByteCircuits(const TransitionGraph& tg) {
  std::vector<std::vector<StateId>> found;
  std::vector<StateId> path;
  std::vector<bool> on_path(tg.num_states(), false);

  auto dfs = [&](auto&& self, StateId root, StateId v) -> void {
    path.push_back(v);
    on_path[v] = true;
    for (const Transition& t : tg.Transitions(v)) {
      if (!IsByteTerminal(t.symbol)) continue;
      if (t.target == root) {
        found.push_back(path);
      } else if (t.target > root && !on_path[t.target]) {
        self(self, root, t.target);
      }
    }
    on_path[v] = false;
    path.pop_back();
  };
  for (StateId root = 0; root < tg.num_states(); ++root) dfs(dfs, root, root);

  std::vector<std::vector<StateId>> canon;
  for (std::vector<StateId>& c : found) {
    std::vector<StateId> cc = CanonicalCircuit(std::move(c));
    if (std::find(canon.begin(), canon.end(), cc) == canon.end()) {
      canon.push_back(std::move(cc));
    }
  }
  return canon;
}

/*! \brief Validates a circuit is pure shift and finds its closing byte. */
Cycle MakeCycle(const TransitionGraph& tg, std::vector<StateId> states) {
  for (StateId s : states) {
    SymbolId acc = tg.AccessingSymbol(s);
    if (!IsByteTerminal(acc)) {
      throw BuildError(BuildError::Kind::kDivergentReduction,
                       "DivergentReduction: pumping circuit " + DescribeStack(states) +
                           " passes through state " + std::to_string(s) +
                           " reached by a nonterminal; no stack rewrite preserves "
                           "the language");
    }
  }
  Cycle c;
  c.states = std::move(states);
  StateId last = c.states.back();
  StateId entry = c.states.front();
  std::optional<uint8_t> closing;
  for (const Transition& t : tg.Transitions(last)) {
    if (IsByteTerminal(t.symbol) && t.target == entry) {
      closing = static_cast<uint8_t>(t.symbol);
      break;  // byte -> target is injective per state: unique closing byte
    }
  }
  if (!closing) {
    throw BuildError(BuildError::Kind::kDivergentReduction,
                     "DivergentReduction: circuit " + DescribeStack(c.states) +
                         " has no closing byte transition");
  }
  c.closing_byte = *closing;
  return c;
}

void CheckCircuitConsistency(const std::vector<Cycle>& cycles) {
  for (size_t i = 0; i < cycles.size(); ++i) {
    for (size_t j = i + 1; j < cycles.size(); ++j) {
      for (StateId s : cycles[i].states) {
        if (std::find(cycles[j].states.begin(), cycles[j].states.end(), s) !=
            cycles[j].states.end()) {
          throw BuildError(BuildError::Kind::kOverlappingCycles,
                           "OverlappingCycles: circuits " + DescribeStack(cycles[i].states) +
                               " and " + DescribeStack(cycles[j].states) +
                               " share state " + std::to_string(s));
        }
      }
    }
  }
}

}  // namespace

bool EdgeOrderBefore(const PrefixConditionedEdge& a, const PrefixConditionedEdge& b) {
  if (a.source != b.source) return a.source < b.source;
  if (a.match_pop.size() != b.match_pop.size()) {
    return a.match_pop.size() > b.match_pop.size();
  }
  int ra = OriginRank(a.origin);
  int rb = OriginRank(b.origin);
  if (ra != rb) return ra < rb;
  if (a.match_pop != b.match_pop) return a.match_pop < b.match_pop;
  if (a.accepted.end_marker != b.accepted.end_marker) return b.accepted.end_marker;
  return a.accepted.bytes.ToHex() < b.accepted.bytes.ToHex();
}

std::vector<Cycle> DetectCycles(const Grammar& g, const TransitionGraph& tg,
                                const ParseTables& tables, const BuildOptions& options) {
  std::vector<Cycle> cycles;
  if (options.conservative_cycles) {
    for (std::vector<StateId>& c : ElementaryByteCircuits(tg)) {
      cycles.push_back(MakeCycle(tg, std::move(c)));
    }
    // Deliberately no overlap check: conservative mode is a debugging device
    // and rewrites whatever circuits exist, sound or not.
    return cycles;
  }
  for (;;) {
    std::vector<PumpReport> pumps;
    ChainSimulator sim(g, tg, tables, cycles, options);
    sim.Run(nullptr, &pumps);
    bool changed = false;
    for (PumpReport& p : pumps) {
      std::vector<StateId> canon = CanonicalCircuit(std::move(p.circuit));
      bool known = false;
      for (const Cycle& c : cycles) known = known || c.states == canon;
      if (known) continue;
      cycles.push_back(MakeCycle(tg, std::move(canon)));
      changed = true;
    }
    if (!changed) break;
    CheckCircuitConsistency(cycles);
  }
  return cycles;
}

void AddAcceptanceEdges(const TransitionGraph& tg, Dpda* out) {
  for (StateId s = 0; s < tg.num_states(); ++s) {
    for (const Transition& t : tg.Transitions(s)) {
      if (!IsByteTerminal(t.symbol)) continue;
      PrefixConditionedEdge e;
      e.source = s;
      e.accepted.bytes.Set(static_cast<uint8_t>(t.symbol));
      e.match_pop = {s};
      e.push = {s, t.target};
      e.target = t.target;
      e.origin = PrefixConditionedEdge::Origin::kAcceptance;
      out->edges.push_back(std::move(e));
      out->stats.num_acceptance++;
    }
  }
}

void ApplyCycleBackEdges(const std::vector<Cycle>& cycles, Dpda* out) {
  for (const Cycle& c : cycles) {
    PrefixConditionedEdge e;
    e.source = c.states.back();
    e.accepted.bytes.Set(c.closing_byte);
    e.match_pop.assign(c.states.rbegin(), c.states.rend());
    e.push = {c.states.front()};
    e.target = c.states.front();
    e.origin = PrefixConditionedEdge::Origin::kCycleBack;
    out->edges.push_back(std::move(e));
    out->stats.num_cycle_back++;
  }
  out->cycles = cycles;
}

void GenerateReductionEdges(const Grammar& g, const TransitionGraph& tg,
                            const ParseTables& tables, const std::vector<Cycle>& cycles,
                            const BuildOptions& options, Dpda* out) {
  ChainSimulator sim(g, tg, tables, cycles, options);
  sim.Run(out, nullptr);
}

void ValidateDeterminism(const Dpda& dpda) {
  auto fail = [](const std::string& msg) {
    throw BuildError(BuildError::Kind::kNotLR1Conflict, "NondeterministicEdges: " + msg);
  };
  for (StateId s = 0; s < dpda.num_states; ++s) {
    std::span<const PrefixConditionedEdge> es = dpda.EdgesOf(s);
    for (const PrefixConditionedEdge& e : es) {
      if (e.match_pop.empty() || e.match_pop.front() != s) {
        fail("edge at state " + std::to_string(s) + " conditions on " +
             DescribeStack(e.match_pop));
      }
      if (e.push_shift_target) {
        bool bad = false;
        e.accepted.bytes.ForEach([&](uint8_t b) {
          StateId landing = e.push.empty() ? -1 : e.push.back();
          if (landing < 0 || dpda.ShiftTarget(landing, b) < 0) bad = true;
        });
        if (e.accepted.end_marker) bad = true;
        if (bad) fail("dynamic edge at state " + std::to_string(s) + " cannot resolve");
      } else if (e.push.empty() && e.target != dpda.accept_state) {
        fail("edge at state " + std::to_string(s) + " pushes nothing");
      }
    }
    for (size_t i = 0; i < es.size(); ++i) {
      for (size_t j = i + 1; j < es.size(); ++j) {
        const PrefixConditionedEdge& a = es[i];
        const PrefixConditionedEdge& b = es[j];
        if (a.match_pop != b.match_pop) continue;
        if (OriginRank(a.origin) != OriginRank(b.origin)) continue;
        ByteSet common = a.accepted.bytes;
        common &= b.accepted.bytes;
        bool dollar = a.accepted.end_marker && b.accepted.end_marker;
        if (!common.Empty() || dollar) {
          fail("state " + std::to_string(s) + ": two rank-equal edges on " +
               DescribeStack(a.match_pop) + " accept a common terminal");
        }
      }
    }
  }
}

void FinalizeEdgeOrder(Dpda* dpda) {
  std::sort(dpda->edges.begin(), dpda->edges.end(),
            [](const PrefixConditionedEdge& a, const PrefixConditionedEdge& b) {
              return EdgeOrderBefore(a, b);
            });
  std::sort(dpda->composites.begin(), dpda->composites.end(),
            [](const PrefixConditionedEdge& a, const PrefixConditionedEdge& b) {
              return EdgeOrderBefore(a, b);
            });
  auto ranges = [&](const std::vector<PrefixConditionedEdge>& edges,
                    std::vector<int32_t>* begin) {
    begin->assign(static_cast<size_t>(dpda->num_states) + 1, 0);
    for (const PrefixConditionedEdge& e : edges) (*begin)[e.source + 1]++;
    for (StateId s = 0; s < dpda->num_states; ++s) (*begin)[s + 1] += (*begin)[s];
  };
  ranges(dpda->edges, &dpda->edge_begin);
  ranges(dpda->composites, &dpda->composite_begin);
}

uint64_t HashGrammarText(const std::string& normalized) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : normalized) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

Dpda BuildDpda(const Grammar& g, const BuildOptions& options) {
  const Grammar& ag_ref = g;
  Grammar augmented_local;
  if (!g.augmented()) {
    augmented_local = Augment(g);
  }
  const Grammar& ag = g.augmented() ? ag_ref : augmented_local;

  FirstSets first = ComputeFirstSets(ag);
  TransitionGraph tg = BuildCanonicalCollection(ag, first, options.state_ceiling);
  ParseTables tables = BuildTables(ag, tg);

  Dpda dpda;
  dpda.num_states = tg.num_states();
  dpda.initial_state = tg.initial_state();
  dpda.accept_state = tg.accept_state();
  dpda.grammar_text = PrintGrammar(ag);
  dpda.grammar_hash = HashGrammarText(dpda.grammar_text);
  dpda.shift_targets.assign(static_cast<size_t>(tg.num_states()) * 256, -1);
  for (StateId s = 0; s < tg.num_states(); ++s) {
    for (const Transition& t : tg.Transitions(s)) {
      if (IsByteTerminal(t.symbol)) {
        dpda.shift_targets[static_cast<size_t>(s) * 256 + t.symbol] = t.target;
      }
    }
  }

  std::vector<Cycle> cycles = DetectCycles(ag, tg, tables, options);
  AddAcceptanceEdges(tg, &dpda);
  ApplyCycleBackEdges(cycles, &dpda);
  GenerateReductionEdges(ag, tg, tables, cycles, options, &dpda);
  dpda.stats.num_states = tg.num_states();
  dpda.stats.edges_before_aggregation = static_cast<int64_t>(dpda.edges.size());

  if (options.aggregate) {
    dpda.stats.aggregated_groups = AggregateEdges(&dpda);
  }
  FinalizeEdgeOrder(&dpda);
  ValidateDeterminism(dpda);
  if (options.merge) {
    dpda.stats.num_merged = MergeEdges(&dpda);
    FinalizeEdgeOrder(&dpda);
  }
  return dpda;
}

}  // namespace gmask
