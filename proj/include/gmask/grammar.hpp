/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/grammar.hpp
 * \brief BNF grammar parsing, validation, augmentation, and FIRST sets.
 *
 * Grammar text is line oriented: `Lhs -> alt1 | alt2`, one rule per line,
 * `#` starts a comment. Terminals are double-quoted byte strings with \xNN,
 * \" and \\ escapes; a multi-byte literal desugars into one terminal symbol
 * per byte. An empty alternative denotes the empty string.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "byte_set.hpp"

namespace gmask {

/*!
 * Symbol ids: 0..255 are byte terminals (the byte value), 256 is the $ end
 * marker, ids >= 257 are nonterminals in first-appearance order.
 */
using SymbolId = int32_t;
constexpr SymbolId kEndMarker = 256;
constexpr SymbolId kFirstNonterminal = 257;

inline bool IsByteTerminal(SymbolId s) { return s >= 0 && s < 256; }
inline bool IsNonterminal(SymbolId s) { return s >= kFirstNonterminal; }

class GrammarError : public std::runtime_error {
 public:
  enum class Kind { kMalformed, kUndefinedSymbol, kEmptyGrammar, kAlreadyAugmented };

  GrammarError(Kind kind, const std::string& msg, int line = 0, int column = 0)
      : std::runtime_error(msg), kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

struct Production {
  SymbolId lhs;
  std::vector<SymbolId> rhs;  // empty for an epsilon production

  friend bool operator==(const Production& a, const Production& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
};

class Grammar {
 public:
  const std::vector<Production>& productions() const { return productions_; }
  const Production& production(int32_t id) const { return productions_[id]; }
  int32_t num_productions() const { return static_cast<int32_t>(productions_.size()); }

  SymbolId start() const { return start_; }
  bool augmented() const { return augmented_production_.has_value(); }
  /*! \brief Production id of `Start' -> Start`; only valid once augmented. */
  int32_t augmented_production() const { return *augmented_production_; }
  SymbolId augmented_start() const { return productions_[*augmented_production_].lhs; }

  int32_t num_nonterminals() const { return static_cast<int32_t>(nonterminal_names_.size()); }
  const std::string& NonterminalName(SymbolId s) const {
    return nonterminal_names_[s - kFirstNonterminal];
  }
  /*! \brief Byte terminals that appear in some rhs. */
  const ByteSet& terminals() const { return terminals_; }

  /*! \brief Production ids with the given lhs, in declaration order. */
  const std::vector<int32_t>& ProductionsOf(SymbolId lhs) const {
    return productions_of_[lhs - kFirstNonterminal];
  }

  friend Grammar ParseGrammar(const std::string& text);
  friend Grammar Augment(const Grammar& g);

 private:
  std::vector<Production> productions_;
  std::vector<std::string> nonterminal_names_;
  std::vector<std::vector<int32_t>> productions_of_;
  ByteSet terminals_;
  SymbolId start_ = kFirstNonterminal;
  std::optional<int32_t> augmented_production_;
};

/*!
 * \brief Parses grammar text. The start symbol is the lhs of the first rule.
 * \throws GrammarError kMalformed (with line/column), kUndefinedSymbol,
 *         kEmptyGrammar.
 */
Grammar ParseGrammar(const std::string& text);

/*!
 * \brief Returns a copy extended with `Start' -> Start` appended last; ids of
 * existing productions are unchanged.
 * \throws GrammarError kAlreadyAugmented on a second application.
 */
Grammar Augment(const Grammar& g);

/*! \brief Renders the grammar back to parseable text, one production per line. */
std::string PrintGrammar(const Grammar& g);

/*! \brief Human-readable symbol name: quoted byte, $, or nonterminal name. */
std::string SymbolName(const Grammar& g, SymbolId s);

class FirstSets {
 public:
  explicit FirstSets(int32_t num_nonterminals) : nonterminal_first_(num_nonterminals) {}

  /*! \brief FIRST of a single symbol; for a byte terminal that is {byte}. */
  TerminalSet First(SymbolId s) const;

  bool Nullable(SymbolId s) const {
    return IsNonterminal(s) && nonterminal_first_[s - kFirstNonterminal].epsilon;
  }

  /*!
   * \brief FIRST of the sequence `rest` followed by any terminal in `tail`.
   * The result carries no epsilon marker when tail is non-empty.
   */
  TerminalSet FirstOfSequence(const SymbolId* rest, size_t n, const TerminalSet& tail) const;

  TerminalSet& MutableNonterminalFirst(SymbolId s) {
    return nonterminal_first_[s - kFirstNonterminal];
  }

 private:
  std::vector<TerminalSet> nonterminal_first_;
};

/*!
 * \brief Least-fixpoint FIRST computation; epsilon membership marks nullable
 * nonterminals.
 */
FirstSets ComputeFirstSets(const Grammar& g);

namespace detail {
/*! \brief One propagation round; returns whether anything changed. */
bool PropagateFirstRound(const Grammar& g, FirstSets* f);
}  // namespace detail

/*! \brief Escapes a byte string into the grammar's quoted-literal syntax (no quotes added). */
std::string EscapeBytes(const std::string& bytes);
/*! \brief One byte as a readable token, e.g. `'a'` or `'\x1f'`. */
std::string ByteName(uint8_t b);

}  // namespace gmask
