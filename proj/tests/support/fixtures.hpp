/*!
 *  Copyright (c) 2026 by Contributors
 * \file support/fixtures.hpp
 * \brief Helpers to load the fixture grammars shipped under grammars/.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gmask/grammar.hpp"
#include "gmask/lr1.hpp"

#ifndef GMASK_GRAMMAR_DIR
#error "GMASK_GRAMMAR_DIR must point at the fixture grammar directory"
#endif

namespace gmask::testing {

inline std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string FixturePath(const std::string& name) {
  return std::string(GMASK_GRAMMAR_DIR) + "/" + name + ".bnf";
}

inline std::string FixtureText(const std::string& name) {
  return ReadTextFile(FixturePath(name));
}

/*! \brief Parses and augments a fixture grammar by basename (e.g. "paren"). */
inline Grammar LoadFixture(const std::string& name) {
  return Augment(ParseGrammar(FixtureText(name)));
}

}  // namespace gmask::testing
