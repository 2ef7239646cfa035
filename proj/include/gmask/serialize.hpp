/*!
 *  Copyright (c) 2026 by Contributors
 * \file gmask/serialize.hpp
 * \brief Deterministic on-disk format for compiled automata, vocabulary
 * loading, and a graphviz export for inspection.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dpda.hpp"

namespace gmask {

class SerializeError : public std::runtime_error {
 public:
  enum class Kind { kBadMagic, kBadVersion, kParse, kStructure };
  SerializeError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/*!
 * \brief Renders the automaton as a magic line followed by one JSON object
 * with sorted keys; equal automata serialize to identical bytes.
 */
std::string SerializeDpda(const Dpda& dpda);

/*!
 * \brief Parses and validates a serialized automaton. Edge order is
 * re-derived and the determinism contract re-checked, so a tampered file
 * cannot smuggle in an inconsistent machine.
 * \throws SerializeError on any malformed, truncated, or inconsistent input.
 */
Dpda DeserializeDpda(const std::string& bytes);

/*!
 * \brief Parses a vocabulary file: a JSON array of strings. After JSON
 * decoding, `\xNN` escapes (two hex digits) and `\\` are rewritten so
 * arbitrary byte values can be expressed portably.
 * \throws SerializeError on malformed files or bad escapes.
 */
std::vector<std::string> LoadVocabulary(const std::string& bytes);

/*! \brief Applies the `\xNN` / `\\` rewriting of vocabulary entries. */
std::string UnescapeToken(const std::string& s);

/*!
 * \brief Inverse of UnescapeToken: escapes backslashes and every byte
 * outside printable ASCII as `\xNN`, yielding a string that survives JSON
 * encoding and UnescapeToken unchanged.
 */
std::string EscapeToken(const std::string& s);

/*! \brief Graphviz digraph of the automaton's edges for human inspection. */
std::string ExportDot(const Dpda& dpda);

}  // namespace gmask
