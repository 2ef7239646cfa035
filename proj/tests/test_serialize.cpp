// Tests for the on-disk automaton format, vocabulary loading, and the
// graphviz export.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "gmask/dpda.hpp"
#include "gmask/grammar.hpp"
#include "gmask/runtime.hpp"
#include "gmask/serialize.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"

using namespace gmask;
using gmask::testing::FixtureText;
using nlohmann::json;

namespace {

Dpda BuildFixture(const char* name) { return BuildDpda(ParseGrammar(FixtureText(name))); }

// Splits a serialized blob into magic line and parsed JSON payload.
std::pair<std::string, json> Parts(const std::string& blob) {
  size_t nl = blob.find('\n');
  REQUIRE(nl != std::string::npos);
  return {blob.substr(0, nl), json::parse(blob.substr(nl + 1))};
}

std::string Reassemble(const std::string& magic, const json& payload) {
  return magic + "\n" + payload.dump() + "\n";
}

SerializeError::Kind LoadKind(const std::string& blob) {
  try {
    DeserializeDpda(blob);
  } catch (const SerializeError& e) {
    return e.kind();
  }
  FAIL("expected a load failure");
  return SerializeError::Kind::kParse;
}

}  // namespace

TEST_CASE("serialization round trips byte for byte") {
  for (const char* name : {"paren", "list_left", "list_right", "digits", "expr", "json"}) {
    CAPTURE(name);
    Dpda d = BuildFixture(name);
    std::string blob = SerializeDpda(d);
    Dpda loaded = DeserializeDpda(blob);
    CHECK(SerializeDpda(loaded) == blob);
    CHECK(loaded.num_states == d.num_states);
    CHECK(loaded.edges.size() == d.edges.size());
    CHECK(loaded.composites.size() == d.composites.size());
    CHECK(loaded.cycles.size() == d.cycles.size());
    CHECK(loaded.grammar_hash == d.grammar_hash);
    CHECK(loaded.stats.edges_before_aggregation == d.stats.edges_before_aggregation);
  }
}

TEST_CASE("a loaded machine behaves exactly like the built one") {
  Grammar g = ParseGrammar(FixtureText("paren"));
  Dpda built = BuildDpda(g);
  Engine a(built);
  Engine b(DeserializeDpda(SerializeDpda(built)));
  std::vector<std::string> vocab = {"a", "(", ")", "((", "a)", "(a)", ")))"};
  TokenTrie trie = TokenTrie::Build(vocab);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    std::string s = gmask::testing::SampleSentence(g, &rng, 16);
    if (i % 2) s = gmask::testing::MutateString(s, g.terminals(), &rng);
    auto ra = a.RunSequence(a.InitialConfig(), s, true);
    auto rb = b.RunSequence(b.InitialConfig(), s, true);
    CHECK(ra.accepted == rb.accepted);
    CHECK(ra.reject_offset == rb.reject_offset);
    CHECK(ra.steps == rb.steps);
  }
  CHECK(a.ComputeMask(a.InitialConfig(), trie).ToHex() ==
        b.ComputeMask(b.InitialConfig(), trie).ToHex());
}

TEST_CASE("magic and version are enforced") {
  std::string blob = SerializeDpda(BuildFixture("paren"));
  CHECK(blob.substr(0, 9) == "GMASKDP1\n");

  CHECK(LoadKind("BOGUS123\n{}") == SerializeError::Kind::kBadMagic);
  CHECK(LoadKind("") == SerializeError::Kind::kBadMagic);
  CHECK(LoadKind("GMASKDP1") == SerializeError::Kind::kBadMagic);  // no newline

  auto [magic, payload] = Parts(blob);
  payload["version"] = 2;
  CHECK(LoadKind(Reassemble(magic, payload)) == SerializeError::Kind::kBadVersion);
}

TEST_CASE("truncated or garbled payloads fail cleanly") {
  std::string blob = SerializeDpda(BuildFixture("paren"));
  CHECK(LoadKind("GMASKDP1\nnot json at all") == SerializeError::Kind::kParse);
  CHECK(LoadKind(blob.substr(0, blob.size() / 2)) == SerializeError::Kind::kParse);
  CHECK(LoadKind("GMASKDP1\n[1,2,3]") == SerializeError::Kind::kParse);
}

TEST_CASE("structural tampering is rejected") {
  std::string blob = SerializeDpda(BuildFixture("paren"));
  auto [magic, payload] = Parts(blob);

  SUBCASE("grammar text no longer matches its hash") {
    json p = payload;
    p["grammar_text"] = std::string(p["grammar_text"].get<std::string>()) + " ";
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("edge pointing outside the state space") {
    json p = payload;
    p["edges"][0]["target"] = 999;
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("condition must start at the edge's source") {
    json p = payload;
    json cond = p["edges"][0]["match"];
    cond[0] = (cond[0].get<int>() + 1) % p["num_states"].get<int>();
    p["edges"][0]["match"] = cond;
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("missing required field") {
    json p = payload;
    p.erase("edges");
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("duplicated edge breaks the determinism contract") {
    json p = payload;
    p["edges"].push_back(p["edges"][0]);
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("dynamic edge with a fixed target is inconsistent") {
    json p = payload;
    bool flipped = false;
    for (auto& e : p["edges"]) {
      if (e["dynamic"].get<bool>()) {
        e["target"] = 0;
        flipped = true;
        break;
      }
    }
    REQUIRE(flipped);
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
  SUBCASE("bad accepted-set hex") {
    json p = payload;
    p["edges"][0]["accepted"] = "zz";
    CHECK(LoadKind(Reassemble(magic, p)) == SerializeError::Kind::kStructure);
  }
}

TEST_CASE("token unescaping") {
  CHECK(UnescapeToken("plain") == "plain");
  CHECK(UnescapeToken("\\x41") == "A");
  CHECK(UnescapeToken("a\\x00b") == std::string("a\0b", 3));
  CHECK(UnescapeToken("\\\\x41") == "\\x41");
  CHECK(UnescapeToken("\\xff") == "\xff");
  CHECK(UnescapeToken("\\xFF") == "\xff");
  CHECK_THROWS_AS(UnescapeToken("bad\\"), SerializeError);
  CHECK_THROWS_AS(UnescapeToken("\\x4"), SerializeError);
  CHECK_THROWS_AS(UnescapeToken("\\xgg"), SerializeError);
  CHECK_THROWS_AS(UnescapeToken("\\n"), SerializeError);
}

TEST_CASE("escaping round trips arbitrary bytes") {
  CHECK(EscapeToken("plain") == "plain");
  CHECK(EscapeToken("\\") == "\\\\");
  CHECK(EscapeToken(std::string("\0", 1)) == "\\x00");
  CHECK(EscapeToken("\xff") == "\\xff");
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string raw;
    size_t len = rng() % 12;
    for (size_t i = 0; i < len; ++i) raw.push_back(static_cast<char>(rng() & 0xff));
    std::string esc = EscapeToken(raw);
    for (char c : esc) {
      unsigned char b = static_cast<unsigned char>(c);
      CHECK(b >= 0x20);
      CHECK(b <= 0x7e);
    }
    CHECK(UnescapeToken(esc) == raw);
  }
}

TEST_CASE("vocabulary loading") {
  auto v = LoadVocabulary(R"(["a", "(", "\\x29", "ab\\\\cd"])");
  REQUIRE(v.size() == 4);
  CHECK(v[0] == "a");
  CHECK(v[1] == "(");
  CHECK(v[2] == ")");
  CHECK(v[3] == "ab\\cd");

  CHECK_THROWS_AS(LoadVocabulary("{}"), SerializeError);
  CHECK_THROWS_AS(LoadVocabulary("[1]"), SerializeError);
  CHECK_THROWS_AS(LoadVocabulary("not json"), SerializeError);
}

TEST_CASE("graphviz export is deterministic and well formed") {
  Dpda d = BuildFixture("list_right");
  std::string dot = ExportDot(d);
  CHECK(dot == ExportDot(d));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("doublecircle") != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);
  CHECK(dot.back() == '\n');
}
