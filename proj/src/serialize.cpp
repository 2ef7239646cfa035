/*!
 *  Copyright (c) 2026 by Contributors
 * \file serialize.cpp
 */
#include "gmask/serialize.hpp"

#include <cstdio>
#include <json.hpp>
#include <sstream>
#include <string>

namespace gmask {

namespace {

using nlohmann::json;  // std::map-backed: object keys serialize sorted

constexpr char kMagic[] = "GMASKDP1";
constexpr int kVersion = 1;

std::string HashHex(uint64_t h) {
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json EdgeToJson(const PrefixConditionedEdge& e, bool composite) {
  json j;
  j["accepted"] = e.accepted.bytes.ToHex();
  j["dollar"] = e.accepted.end_marker;
  j["dynamic"] = e.push_shift_target;
  j["match"] = e.match_pop;
  j["origin"] = static_cast<int>(e.origin);
  j["push"] = e.push;
  j["source"] = e.source;
  j["target"] = e.target;
  if (composite) {
    j["second"] = e.accepted_second.bytes.ToHex();
    j["second_dollar"] = e.accepted_second.end_marker;
  }
  return j;
}

[[noreturn]] void Bad(SerializeError::Kind kind, const std::string& msg) {
  throw SerializeError(kind, msg);
}

// json::at with structure errors mapped to SerializeError.
const json& Field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) Bad(SerializeError::Kind::kStructure, std::string("missing field ") + key);
  return *it;
}

int64_t IntField(const json& j, const char* key) {
  const json& f = Field(j, key);
  if (!f.is_number_integer()) {
    Bad(SerializeError::Kind::kStructure, std::string("field ") + key + " must be an integer");
  }
  return f.get<int64_t>();
}

std::string StrField(const json& j, const char* key) {
  const json& f = Field(j, key);
  if (!f.is_string()) {
    Bad(SerializeError::Kind::kStructure, std::string("field ") + key + " must be a string");
  }
  return f.get<std::string>();
}

bool BoolField(const json& j, const char* key) {
  const json& f = Field(j, key);
  if (!f.is_boolean()) {
    Bad(SerializeError::Kind::kStructure, std::string("field ") + key + " must be a boolean");
  }
  return f.get<bool>();
}

std::vector<StateId> StateVec(const json& j, const char* key, StateId num_states,
                              StateId floor_value = 0) {
  const json& f = Field(j, key);
  if (!f.is_array()) {
    Bad(SerializeError::Kind::kStructure, std::string("field ") + key + " must be an array");
  }
  std::vector<StateId> out;
  for (const json& v : f) {
    if (!v.is_number_integer()) {
      Bad(SerializeError::Kind::kStructure, std::string(key) + " entries must be integers");
    }
    int64_t s = v.get<int64_t>();
    if (s < floor_value || s >= num_states) {
      Bad(SerializeError::Kind::kStructure,
          std::string(key) + " entry " + std::to_string(s) + " out of range");
    }
    out.push_back(static_cast<StateId>(s));
  }
  return out;
}

ByteSet HexField(const json& j, const char* key) {
  std::string hex = StrField(j, key);
  try {
    return ByteSet::FromHex(hex);
  } catch (const std::invalid_argument& e) {
    Bad(SerializeError::Kind::kStructure, std::string(key) + ": " + e.what());
  }
}

PrefixConditionedEdge EdgeFromJson(const json& j, StateId num_states, bool composite) {
  PrefixConditionedEdge e;
  int64_t source = IntField(j, "source");
  if (source < 0 || source >= num_states) {
    Bad(SerializeError::Kind::kStructure, "edge source out of range");
  }
  e.source = static_cast<StateId>(source);
  e.accepted.bytes = HexField(j, "accepted");
  e.accepted.end_marker = BoolField(j, "dollar");
  e.push_shift_target = BoolField(j, "dynamic");
  e.match_pop = StateVec(j, "match", num_states);
  e.push = StateVec(j, "push", num_states);
  int64_t origin = IntField(j, "origin");
  if (origin < 0 || origin > 3) Bad(SerializeError::Kind::kStructure, "edge origin out of range");
  e.origin = static_cast<PrefixConditionedEdge::Origin>(origin);
  int64_t target = IntField(j, "target");
  if (target < -1 || target >= num_states) {
    Bad(SerializeError::Kind::kStructure, "edge target out of range");
  }
  e.target = static_cast<StateId>(target);
  if (e.match_pop.empty() || e.match_pop.front() != e.source) {
    Bad(SerializeError::Kind::kStructure, "edge condition must start at its source state");
  }
  if (e.push_shift_target) {
    if (e.target != -1 || e.push.empty() || e.accepted.end_marker) {
      Bad(SerializeError::Kind::kStructure, "dynamic edge shape is inconsistent");
    }
  } else if (e.target == -1) {
    Bad(SerializeError::Kind::kStructure, "static edge lacks a target");
  }
  if (composite) {
    e.accepted_second.bytes = HexField(j, "second");
    e.accepted_second.end_marker = BoolField(j, "second_dollar");
  }
  return e;
}

}  // namespace

std::string SerializeDpda(const Dpda& dpda) {
  json j;
  j["accept_state"] = dpda.accept_state;
  j["grammar_hash"] = HashHex(dpda.grammar_hash);
  j["grammar_text"] = dpda.grammar_text;
  j["initial_state"] = dpda.initial_state;
  j["num_states"] = dpda.num_states;
  j["version"] = kVersion;

  json shifts = json::array();
  for (StateId s = 0; s < dpda.num_states; ++s) {
    for (int b = 0; b < 256; ++b) {
      StateId t = dpda.shift_targets[static_cast<size_t>(s) * 256 + b];
      if (t >= 0) shifts.push_back(json::array({s, b, t}));
    }
  }
  j["shifts"] = std::move(shifts);

  json edges = json::array();
  for (const PrefixConditionedEdge& e : dpda.edges) edges.push_back(EdgeToJson(e, false));
  j["edges"] = std::move(edges);

  json composites = json::array();
  for (const PrefixConditionedEdge& e : dpda.composites) {
    composites.push_back(EdgeToJson(e, true));
  }
  j["composites"] = std::move(composites);

  json cycles = json::array();
  for (const Cycle& c : dpda.cycles) {
    json jc;
    jc["closing_byte"] = static_cast<int>(c.closing_byte);
    jc["states"] = c.states;
    cycles.push_back(std::move(jc));
  }
  j["cycles"] = std::move(cycles);

  json stats;
  stats["acceptance_edges"] = dpda.stats.num_acceptance;
  stats["aggregated_groups"] = dpda.stats.aggregated_groups;
  stats["cycle_back_edges"] = dpda.stats.num_cycle_back;
  stats["edges_before_aggregation"] = dpda.stats.edges_before_aggregation;
  stats["merged_edges"] = dpda.stats.num_merged;
  stats["reduction_edges"] = dpda.stats.num_reduction;
  stats["states"] = dpda.stats.num_states;
  j["stats"] = std::move(stats);

  return std::string(kMagic) + "\n" + j.dump() + "\n";
}

Dpda DeserializeDpda(const std::string& bytes) {
  size_t nl = bytes.find('\n');
  if (nl == std::string::npos || bytes.substr(0, nl) != kMagic) {
    Bad(SerializeError::Kind::kBadMagic, "missing or wrong magic line");
  }
  json j = json::parse(bytes.substr(nl + 1), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    Bad(SerializeError::Kind::kParse, "payload is not a JSON object");
  }
  if (IntField(j, "version") != kVersion) {
    Bad(SerializeError::Kind::kBadVersion,
        "unsupported version " + Field(j, "version").dump());
  }

  Dpda d;
  int64_t num_states = IntField(j, "num_states");
  if (num_states < 1 || num_states > kDefaultStateCeiling) {
    Bad(SerializeError::Kind::kStructure, "num_states out of range");
  }
  d.num_states = static_cast<StateId>(num_states);
  int64_t initial = IntField(j, "initial_state");
  int64_t accept = IntField(j, "accept_state");
  if (initial < 0 || initial >= num_states || accept < 0 || accept >= num_states) {
    Bad(SerializeError::Kind::kStructure, "initial or accept state out of range");
  }
  d.initial_state = static_cast<StateId>(initial);
  d.accept_state = static_cast<StateId>(accept);

  d.grammar_text = StrField(j, "grammar_text");
  std::string hash_hex = StrField(j, "grammar_hash");
  d.grammar_hash = HashGrammarText(d.grammar_text);
  if (HashHex(d.grammar_hash) != hash_hex) {
    Bad(SerializeError::Kind::kStructure, "grammar hash does not match grammar text");
  }

  d.shift_targets.assign(static_cast<size_t>(num_states) * 256, -1);
  const json& shifts = Field(j, "shifts");
  if (!shifts.is_array()) Bad(SerializeError::Kind::kStructure, "shifts must be an array");
  for (const json& row : shifts) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() ||
        !row[1].is_number_integer() || !row[2].is_number_integer()) {
      Bad(SerializeError::Kind::kStructure, "shift rows must be [state, byte, target]");
    }
    int64_t s = row[0].get<int64_t>();
    int64_t b = row[1].get<int64_t>();
    int64_t t = row[2].get<int64_t>();
    if (s < 0 || s >= num_states || b < 0 || b > 255 || t < 0 || t >= num_states) {
      Bad(SerializeError::Kind::kStructure, "shift row out of range");
    }
    d.shift_targets[static_cast<size_t>(s) * 256 + b] = static_cast<StateId>(t);
  }

  const json& edges = Field(j, "edges");
  if (!edges.is_array()) Bad(SerializeError::Kind::kStructure, "edges must be an array");
  for (const json& je : edges) {
    d.edges.push_back(EdgeFromJson(je, d.num_states, false));
  }
  const json& composites = Field(j, "composites");
  if (!composites.is_array()) {
    Bad(SerializeError::Kind::kStructure, "composites must be an array");
  }
  for (const json& je : composites) {
    d.composites.push_back(EdgeFromJson(je, d.num_states, true));
  }

  const json& cycles = Field(j, "cycles");
  if (!cycles.is_array()) Bad(SerializeError::Kind::kStructure, "cycles must be an array");
  for (const json& jc : cycles) {
    Cycle c;
    int64_t b = IntField(jc, "closing_byte");
    if (b < 0 || b > 255) Bad(SerializeError::Kind::kStructure, "closing byte out of range");
    c.closing_byte = static_cast<uint8_t>(b);
    c.states = StateVec(jc, "states", d.num_states);
    if (c.states.empty()) Bad(SerializeError::Kind::kStructure, "cycle without states");
    d.cycles.push_back(std::move(c));
  }

  const json& stats = Field(j, "stats");
  d.stats.num_states = IntField(stats, "states");
  d.stats.num_acceptance = IntField(stats, "acceptance_edges");
  d.stats.num_reduction = IntField(stats, "reduction_edges");
  d.stats.num_cycle_back = IntField(stats, "cycle_back_edges");
  d.stats.num_merged = IntField(stats, "merged_edges");
  d.stats.aggregated_groups = IntField(stats, "aggregated_groups");
  d.stats.edges_before_aggregation = IntField(stats, "edges_before_aggregation");

  // Arbitration order is never trusted from disk: re-derive it, then
  // re-check the determinism contract over the loaded machine.
  FinalizeEdgeOrder(&d);
  try {
    ValidateDeterminism(d);
  } catch (const BuildError& e) {
    Bad(SerializeError::Kind::kStructure, std::string("loaded machine is inconsistent: ") +
                                              e.what());
  }
  return d;
}

std::string EscapeToken(const std::string& s) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    unsigned char b = static_cast<unsigned char>(ch);
    if (ch == '\\') {
      out += "\\\\";
    } else if (b >= 0x20 && b <= 0x7e) {
      out.push_back(ch);
    } else {
      out += "\\x";
      out.push_back(kHex[b >> 4]);
      out.push_back(kHex[b & 0xf]);
    }
  }
  return out;
}

std::string UnescapeToken(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 >= s.size()) {
      Bad(SerializeError::Kind::kParse, "dangling backslash in token");
    }
    char c = s[++i];
    if (c == '\\') {
      out.push_back('\\');
    } else if (c == 'x') {
      if (i + 2 >= s.size()) {
        Bad(SerializeError::Kind::kParse, "truncated \\x escape in token");
      }
      auto hex = [&](char h) -> int {
        if (h >= '0' && h <= '9') return h - '0';
        if (h >= 'a' && h <= 'f') return h - 'a' + 10;
        if (h >= 'A' && h <= 'F') return h - 'A' + 10;
        Bad(SerializeError::Kind::kParse, "bad hex digit in \\x escape");
      };
      int hi = hex(s[i + 1]);
      int lo = hex(s[i + 2]);
      i += 2;
      out.push_back(static_cast<char>(hi * 16 + lo));
    } else {
      Bad(SerializeError::Kind::kParse, std::string("unknown escape \\") + c + " in token");
    }
  }
  return out;
}

std::vector<std::string> LoadVocabulary(const std::string& bytes) {
  json j = json::parse(bytes, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_array()) {
    Bad(SerializeError::Kind::kParse, "vocabulary must be a JSON array of strings");
  }
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const json& v : j) {
    if (!v.is_string()) {
      Bad(SerializeError::Kind::kParse, "vocabulary entries must be strings");
    }
    out.push_back(UnescapeToken(v.get<std::string>()));
  }
  return out;
}

std::string ExportDot(const Dpda& dpda) {
  std::ostringstream out;
  out << "digraph machine {\n  rankdir=LR;\n  node [shape=circle];\n";
  out << "  " << dpda.accept_state << " [shape=doublecircle];\n";
  auto label_bytes = [](const TerminalSet& t) {
    std::string s;
    int shown = 0;
    t.bytes.ForEach([&](uint8_t b) {
      if (shown == 6) {
        s += ",..";
        ++shown;
      }
      if (shown > 6) return;
      if (!s.empty()) s += ",";
      if (b > 0x20 && b < 0x7f && b != '"' && b != '\\') {
        s += static_cast<char>(b);
      } else {
        char buf[8];
        snprintf(buf, sizeof buf, "x%02x", b);
        s += buf;
      }
      ++shown;
    });
    if (t.end_marker) {
      if (!s.empty()) s += ",";
      s += "$";
    }
    return s;
  };
  const char* style[] = {"solid", "dashed", "bold", "dotted"};
  for (const PrefixConditionedEdge& e : dpda.edges) {
    StateId shown_target = e.target >= 0 ? e.target : e.source;
    out << "  " << e.source << " -> " << shown_target << " [label=\"" << label_bytes(e.accepted)
        << " |" << e.match_pop.size() << (e.push_shift_target ? " dyn" : "") << "\" style="
        << style[static_cast<int>(e.origin)] << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace gmask
