/*!
 *  Copyright (c) 2026 by Contributors
 * \file src/grammar.cpp
 */
#include "gmask/grammar.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace gmask {

namespace {

struct LineScanner {
  const std::string& text;
  int line;
  size_t pos = 0;

  LineScanner(const std::string& t, int l) : text(t), line(l) {}

  int Column() const { return static_cast<int>(pos) + 1; }
  bool AtEnd() const { return pos >= text.size(); }
  char Peek() const { return text[pos]; }

  void SkipSpace() {
    while (!AtEnd() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  [[noreturn]] void Fail(const std::string& msg) const {
    std::ostringstream os;
    os << "MalformedGrammar: line " << line << ", column " << Column() << ": " << msg;
    throw GrammarError(GrammarError::Kind::kMalformed, os.str(), line, Column());
  }
};

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string ScanIdentifier(LineScanner& sc) {
  size_t start = sc.pos;
  if (sc.AtEnd() || !IsIdentStart(sc.Peek())) sc.Fail("expected identifier");
  while (!sc.AtEnd() && IsIdentChar(sc.Peek())) ++sc.pos;
  return sc.text.substr(start, sc.pos - start);
}

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Scans a quoted literal, returning the raw bytes after unescaping.
std::string ScanQuoted(LineScanner& sc) {
  ++sc.pos;  // opening quote
  std::string bytes;
  while (true) {
    if (sc.AtEnd()) sc.Fail("unterminated terminal literal");
    char c = sc.text[sc.pos];
    if (c == '"') {
      ++sc.pos;
      break;
    }
    if (c == '\\') {
      ++sc.pos;
      if (sc.AtEnd()) sc.Fail("dangling escape");
      char e = sc.text[sc.pos];
      if (e == '\\' || e == '"') {
        bytes.push_back(e);
        ++sc.pos;
      } else if (e == 'x') {
        if (sc.pos + 2 >= sc.text.size()) sc.Fail("truncated \\xNN escape");
        int hi = HexValue(sc.text[sc.pos + 1]);
        int lo = HexValue(sc.text[sc.pos + 2]);
        if (hi < 0 || lo < 0) sc.Fail("bad hex digits in \\xNN escape");
        bytes.push_back(static_cast<char>((hi << 4) | lo));
        sc.pos += 3;
      } else {
        sc.Fail(std::string("unknown escape \\") + e);
      }
    } else {
      bytes.push_back(c);
      ++sc.pos;
    }
  }
  if (bytes.empty()) sc.Fail("empty terminal literal");
  return bytes;
}

// Strips a # comment that is outside any quoted literal.
std::string StripComment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

Grammar ParseGrammar(const std::string& text) {
  Grammar g;
  std::map<std::string, SymbolId> ids;

  auto intern = [&](const std::string& name) -> SymbolId {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    SymbolId id = kFirstNonterminal + static_cast<SymbolId>(g.nonterminal_names_.size());
    g.nonterminal_names_.push_back(name);
    g.productions_of_.emplace_back();
    ids.emplace(name, id);
    return id;
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool saw_rule = false;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = StripComment(raw);
    LineScanner sc(line, line_no);
    sc.SkipSpace();
    if (sc.AtEnd()) continue;

    std::string lhs_name = ScanIdentifier(sc);
    sc.SkipSpace();
    if (sc.pos + 1 >= line.size() || line[sc.pos] != '-' || line[sc.pos + 1] != '>') {
      sc.Fail("expected '->' after rule name");
    }
    sc.pos += 2;

    SymbolId lhs = intern(lhs_name);
    if (!saw_rule) {
      g.start_ = lhs;
      saw_rule = true;
    }

    std::vector<SymbolId> rhs;
    bool alternative_open = true;
    auto finish_alternative = [&]() {
      g.productions_of_[lhs - kFirstNonterminal].push_back(g.num_productions());
      g.productions_.push_back(Production{lhs, rhs});
      rhs.clear();
    };

    while (true) {
      sc.SkipSpace();
      if (sc.AtEnd()) break;
      char c = sc.Peek();
      if (c == '|') {
        finish_alternative();
        ++sc.pos;
        alternative_open = true;
      } else if (c == '"') {
        for (char b : ScanQuoted(sc)) {
          rhs.push_back(static_cast<SymbolId>(static_cast<uint8_t>(b)));
          g.terminals_.Set(static_cast<uint8_t>(b));
        }
      } else if (IsIdentStart(c)) {
        rhs.push_back(intern(ScanIdentifier(sc)));
      } else {
        sc.Fail(std::string("unexpected character '") + c + "'");
      }
    }
    (void)alternative_open;
    finish_alternative();  // last (possibly empty) alternative
  }

  if (g.productions_.empty()) {
    throw GrammarError(GrammarError::Kind::kEmptyGrammar, "EmptyGrammar: no rules found");
  }

  for (const Production& p : g.productions_) {
    for (SymbolId s : p.rhs) {
      if (IsNonterminal(s) && g.productions_of_[s - kFirstNonterminal].empty()) {
        throw GrammarError(
            GrammarError::Kind::kUndefinedSymbol,
            "UndefinedSymbol: '" + g.nonterminal_names_[s - kFirstNonterminal] +
                "' is used but has no rule");
      }
    }
  }
  return g;
}

Grammar Augment(const Grammar& g) {
  if (g.augmented()) {
    throw GrammarError(GrammarError::Kind::kAlreadyAugmented,
                       "AlreadyAugmented: grammar already has an augmented start");
  }
  Grammar out = g;
  std::string name = g.NonterminalName(g.start()) + "'";
  SymbolId id = kFirstNonterminal + static_cast<SymbolId>(out.nonterminal_names_.size());
  out.nonterminal_names_.push_back(name);
  out.productions_of_.emplace_back();
  out.augmented_production_ = out.num_productions();
  out.productions_of_.back().push_back(out.num_productions());
  out.productions_.push_back(Production{id, {g.start()}});
  return out;
}

std::string EscapeBytes(const std::string& bytes) {
  std::string out;
  for (char c : bytes) {
    auto u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (u >= 0x20 && u < 0x7f) {
      out.push_back(c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\x%02x", u);
      out += buf;
    }
  }
  return out;
}

std::string ByteName(uint8_t b) {
  return "'" + EscapeBytes(std::string(1, static_cast<char>(b))) + "'";
}

std::string PrintGrammar(const Grammar& g) {
  std::ostringstream os;
  for (int32_t i = 0; i < g.num_productions(); ++i) {
    if (g.augmented() && i == g.augmented_production()) continue;
    const Production& p = g.production(i);
    os << g.NonterminalName(p.lhs) << " ->";
    std::string pending_bytes;
    auto flush = [&]() {
      if (!pending_bytes.empty()) {
        os << " \"" << EscapeBytes(pending_bytes) << "\"";
        pending_bytes.clear();
      }
    };
    for (SymbolId s : p.rhs) {
      if (IsByteTerminal(s)) {
        pending_bytes.push_back(static_cast<char>(s));
      } else {
        flush();
        os << " " << g.NonterminalName(s);
      }
    }
    flush();
    os << "\n";
  }
  return os.str();
}

std::string SymbolName(const Grammar& g, SymbolId s) {
  if (IsByteTerminal(s)) return ByteName(static_cast<uint8_t>(s));
  if (s == kEndMarker) return "$";
  return g.NonterminalName(s);
}

TerminalSet FirstSets::First(SymbolId s) const {
  TerminalSet t;
  if (IsByteTerminal(s)) {
    t.bytes.Set(static_cast<uint8_t>(s));
  } else if (s == kEndMarker) {
    t.end_marker = true;
  } else {
    t = nonterminal_first_[s - kFirstNonterminal];
  }
  return t;
}

TerminalSet FirstSets::FirstOfSequence(const SymbolId* rest, size_t n,
                                       const TerminalSet& tail) const {
  TerminalSet out;
  for (size_t i = 0; i < n; ++i) {
    TerminalSet f = First(rest[i]);
    out.MergeTerminals(f);
    if (!f.epsilon) return out;
  }
  out.MergeTerminals(tail);
  out.epsilon = tail.epsilon;
  return out;
}

namespace detail {

bool PropagateFirstRound(const Grammar& g, FirstSets* f) {
  bool changed = false;
  for (const Production& p : g.productions()) {
    TerminalSet& lhs_first = f->MutableNonterminalFirst(p.lhs);
    bool all_nullable = true;
    for (SymbolId s : p.rhs) {
      TerminalSet s_first = f->First(s);
      changed |= lhs_first.MergeTerminals(s_first);
      if (!s_first.epsilon) {
        all_nullable = false;
        break;
      }
    }
    if (all_nullable && !lhs_first.epsilon) {
      lhs_first.epsilon = true;
      changed = true;
    }
  }
  return changed;
}

}  // namespace detail

FirstSets ComputeFirstSets(const Grammar& g) {
  FirstSets f(g.num_nonterminals());
  while (detail::PropagateFirstRound(g, &f)) {
  }
  return f;
}

std::string ByteSet::ToHex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(64, '0');
  for (int i = 0; i < 64; ++i) {
    out[i] = digits[(words[i / 16] >> ((i % 16) * 4)) & 0xf];
  }
  return out;
}

ByteSet ByteSet::FromHex(const std::string& hex) {
  if (hex.size() != 64) throw std::invalid_argument("byte set hex must be 64 chars");
  ByteSet s;
  for (int i = 0; i < 64; ++i) {
    int v = HexValue(hex[i]);
    if (v < 0) throw std::invalid_argument("bad hex digit in byte set");
    s.words[i / 16] |= static_cast<uint64_t>(v) << ((i % 16) * 4);
  }
  return s;
}

}  // namespace gmask
