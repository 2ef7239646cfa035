// Tests for the two edge rewrites: aggregation of shift-tailed fans into
// dynamic-target edges, and pairwise merging into two-terminal composites.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "gmask/dpda.hpp"
#include "gmask/grammar.hpp"
#include "gmask/optimizer.hpp"
#include "gmask/runtime.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace gmask;
using gmask::testing::FixtureText;
using gmask::testing::SampleSentence;

namespace {

Dpda BuildFromText(const std::string& text, BuildOptions options = {}) {
  return BuildDpda(ParseGrammar(text), options);
}

BuildOptions Raw() {
  BuildOptions o;
  o.aggregate = false;
  o.merge = false;
  return o;
}

using Origin = PrefixConditionedEdge::Origin;

}  // namespace

TEST_CASE("digit-fan reductions collapse into one dynamic edge") {
  Dpda raw = BuildFromText(FixtureText("digits"), Raw());
  CHECK(raw.edges.size() == 262);
  CHECK(raw.stats.num_acceptance == 20);
  CHECK(raw.stats.num_reduction == 242);

  Dpda d = BuildFromText(FixtureText("digits"));
  CHECK(d.edges.size() == 46);
  CHECK(d.edges.size() < raw.edges.size());
  CHECK(d.stats.aggregated_groups == 24);
  CHECK(d.stats.edges_before_aggregation == 262);

  // The headline case: ten per-digit reduction edges sharing the condition
  // and context become a single edge whose successor depends on the byte.
  int dynamic_at_1 = 0;
  for (const auto& e : d.EdgesOf(1)) {
    if (!e.push_shift_target) continue;
    if (e.match_pop != std::vector<StateId>{1, 11, 0}) continue;
    ++dynamic_at_1;
    CHECK(e.origin == Origin::kReduction);
    CHECK(e.target == -1);
    CHECK(e.push == std::vector<StateId>{0, 11});
    CHECK(e.accepted.bytes.Count() == 10);
    for (int b = '0'; b <= '9'; ++b) CHECK(e.accepted.bytes.Test(static_cast<uint8_t>(b)));
    CHECK_FALSE(e.accepted.end_marker);
    // Resolution walks the shift row of the exposed state.
    CHECK(d.ShiftTarget(11, '0') == 1);
    CHECK(d.ShiftTarget(11, '9') == 10);
  }
  CHECK(dynamic_at_1 == 1);
}

TEST_CASE("aggregation groups only shift-tailed same-context fans") {
  Dpda d = BuildFromText(FixtureText("digits"));
  for (const auto& e : d.edges) {
    if (!e.push_shift_target) continue;
    // Dynamic edges always have a context to expose and at least two bytes.
    REQUIRE_FALSE(e.push.empty());
    CHECK(e.accepted.bytes.Count() >= 2);
    CHECK(e.target == -1);
    e.accepted.bytes.ForEach([&](uint8_t b) {
      StateId t = d.ShiftTarget(e.push.back(), b);
      CHECK(t >= 0);
    });
  }
  // The end-marker reductions cannot aggregate and stay plain.
  for (const auto& e : d.edges) {
    if (e.accepted.end_marker) CHECK_FALSE(e.push_shift_target);
  }
}

TEST_CASE("aggregation is idempotent") {
  Dpda d = BuildFromText(FixtureText("digits"));
  size_t before = d.edges.size();
  CHECK(AggregateEdges(&d) == 0);
  CHECK(d.edges.size() == before);
}

TEST_CASE("rewritten and raw automata decide identical languages") {
  std::mt19937_64 rng(99);
  for (const char* name : {"digits", "expr", "paren", "list_left"}) {
    CAPTURE(name);
    Grammar g = ParseGrammar(FixtureText(name));
    Engine fancy(BuildDpda(g));
    Engine plain(BuildDpda(g, Raw()));
    for (int i = 0; i < 400; ++i) {
      std::string s = SampleSentence(g, &rng, 30);
      if (i % 2) s = gmask::testing::MutateString(s, g.terminals(), &rng);
      auto a = fancy.RunSequence(fancy.InitialConfig(), s, true);
      auto b = plain.RunSequence(plain.InitialConfig(), s, false);
      CHECK(a.accepted == b.accepted);
      if (!a.accepted) CHECK(a.reject_offset == b.reject_offset);
    }
  }
}

TEST_CASE("nested pair grammar: exact composite inventory") {
  Dpda d = BuildFromText(FixtureText("paren"));
  REQUIRE(d.composites.size() == 3);
  CHECK(d.stats.num_merged == 3);

  auto find = [&](StateId s, std::vector<StateId> cond) -> const PrefixConditionedEdge& {
    for (const auto& c : d.CompositesOf(s)) {
      if (c.match_pop == cond) return c;
    }
    FAIL("missing composite");
    static PrefixConditionedEdge dummy;
    return dummy;
  };

  // Each one consumes ')' then the end marker and jumps straight to accept.
  for (const auto& [s, cond] : std::vector<std::pair<StateId, std::vector<StateId>>>{
           {5, {5, 1, 0}}, {6, {6, 1, 0}}, {9, {9, 7, 4, 1, 0}}}) {
    const auto& c = find(s, cond);
    CHECK(c.origin == Origin::kMerged);
    CHECK(c.accepted.bytes.Test(')'));
    CHECK(c.accepted.bytes.Count() == 1);
    CHECK_FALSE(c.accepted.end_marker);
    CHECK(c.accepted_second.end_marker);
    CHECK(c.accepted_second.bytes.Count() == 0);
    CHECK(c.push == std::vector<StateId>{0, 3});
    CHECK(c.target == 3);
  }
}

TEST_CASE("merging keeps originals and is idempotent") {
  Dpda d = BuildFromText(FixtureText("paren"));
  size_t regular = d.edges.size();
  std::vector<PrefixConditionedEdge> snapshot = d.composites;
  int64_t again = MergeEdges(&d);
  FinalizeEdgeOrder(&d);
  CHECK(again == 3);
  CHECK(d.edges.size() == regular);
  REQUIRE(d.composites.size() == snapshot.size());
  for (size_t i = 0; i < snapshot.size(); ++i) {
    CHECK(d.composites[i].match_pop == snapshot[i].match_pop);
    CHECK(d.composites[i].push == snapshot[i].push);
  }
}

TEST_CASE("merging never hooks onto a collapse byte") {
  // At the loop state the plain shift shares its byte with the collapse
  // edge; fusing it would let the runner skip collapses and grow the stack.
  Dpda d = BuildFromText(FixtureText("list_right"));
  CHECK(d.composites.empty());

  Dpda two = BuildFromText("L -> \"x\" \"y\" L | \"z\"\n");
  for (const auto& c : two.composites) {
    CHECK_FALSE(c.accepted.bytes.Test('x'));
  }
}

TEST_CASE("composites shorten accepted runs without changing verdicts") {
  Grammar g = ParseGrammar(FixtureText("paren"));
  Engine eng(BuildDpda(g));
  auto plain = eng.RunSequence(eng.InitialConfig(), "(a)", false);
  auto fused = eng.RunSequence(eng.InitialConfig(), "(a)", true);
  CHECK(plain.accepted);
  CHECK(fused.accepted);
  CHECK(plain.steps == 4);
  CHECK(fused.steps == 3);

  auto deep_plain = eng.RunSequence(eng.InitialConfig(), "((((a))))", false);
  auto deep_fused = eng.RunSequence(eng.InitialConfig(), "((((a))))", true);
  CHECK(deep_plain.steps == 10);
  CHECK(deep_fused.steps == 9);

  // Left-recursive list: separator shift fuses with the following element.
  Grammar list = ParseGrammar(FixtureText("list_left"));
  Engine le(BuildDpda(list));
  CHECK(le.RunSequence(le.InitialConfig(), "x,x,x", false).steps == 6);
  CHECK(le.RunSequence(le.InitialConfig(), "x,x,x", true).steps == 4);
}

TEST_CASE("composite conditions extend below the first edge's context") {
  // The deep context of the second half survives in the fused condition:
  // the three-deep composite at state 9 demands the full return path.
  Dpda d = BuildFromText(FixtureText("paren"));
  bool found = false;
  for (const auto& c : d.composites) {
    if (c.source == 9) {
      found = true;
      CHECK(c.match_pop == std::vector<StateId>{9, 7, 4, 1, 0});
    }
  }
  CHECK(found);
}

TEST_CASE("aggregation and merging compose across fixtures") {
  for (const char* name : {"paren", "list_left", "list_right", "digits", "expr", "json"}) {
    CAPTURE(name);
    Dpda both = BuildFromText(FixtureText(name));
    Dpda raw = BuildFromText(FixtureText(name), Raw());
    CHECK(both.edges.size() <= raw.edges.size());
    CHECK(raw.composites.empty());
    CHECK_NOTHROW(ValidateDeterminism(both));
    // Composites never appear in the regular arbitration lists.
    for (const auto& e : both.edges) CHECK(e.origin != Origin::kMerged);
    for (const auto& c : both.composites) CHECK(c.origin == Origin::kMerged);
  }
}
