/*!
 *  Copyright (c) 2026 by Contributors
 * \file support/oracle.cpp
 * \brief Reference parser, sentence enumerator, and sampler implementations.
 */
#include "support/oracle.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace gmask::testing {

bool ReferenceParser::Digest(std::vector<StateId>* stack, SymbolId t,
                             std::vector<std::string>* trace) const {
  for (;;) {
    const Action& a = tables_.ActionAt(stack->back(), t);
    switch (a.type) {
      case Action::Type::kError:
        return false;
      case Action::Type::kShift:
        stack->push_back(a.value);
        if (trace) trace->push_back("s" + std::to_string(a.value));
        return true;
      case Action::Type::kReduce: {
        const Production& p = grammar_.production(a.value);
        stack->resize(stack->size() - p.rhs.size());
        StateId next = tables_.GotoAt(stack->back(), p.lhs);
        if (next < 0) return false;  // cannot happen on well-formed tables
        stack->push_back(next);
        if (trace) trace->push_back("r" + std::to_string(a.value));
        break;
      }
      case Action::Type::kAccept:
        if (trace) trace->push_back("acc");
        return true;
    }
  }
}

ParseOutcome ReferenceParser::Parse(const std::string& input) const {
  ParseOutcome out;
  std::vector<StateId> stack{0};
  for (size_t i = 0; i < input.size(); ++i) {
    SymbolId t = static_cast<uint8_t>(input[i]);
    if (!Digest(&stack, t, &out.trace)) {
      out.reject_offset = static_cast<int64_t>(i);
      return out;
    }
  }
  if (!Digest(&stack, kEndMarker, &out.trace)) {
    out.reject_offset = static_cast<int64_t>(input.size());
    return out;
  }
  out.accepted = true;
  return out;
}

bool ReferenceParser::ViablePrefix(const std::string& prefix) const {
  std::vector<StateId> stack{0};
  for (char c : prefix) {
    if (!Digest(&stack, static_cast<uint8_t>(c), nullptr)) return false;
  }
  return true;
}

std::vector<std::string> EnumerateSentences(const Grammar& g, size_t max_len,
                                            size_t frontier_budget) {
  // BFS over sentential forms; prune any form whose terminal count already
  // exceeds max_len (every nonterminal expands to >= 0 terminals, so the
  // terminal count is a lower bound on the final length).
  std::set<std::string> done;
  std::set<std::vector<SymbolId>> seen;
  std::deque<std::vector<SymbolId>> queue;
  queue.push_back({g.start()});
  seen.insert(queue.front());
  while (!queue.empty()) {
    if (seen.size() > frontier_budget) {
      throw std::runtime_error("sentence enumeration frontier budget exceeded");
    }
    std::vector<SymbolId> form = std::move(queue.front());
    queue.pop_front();
    // Find leftmost nonterminal.
    size_t nt_pos = form.size();
    size_t terminal_count = 0;
    for (size_t i = 0; i < form.size(); ++i) {
      if (IsNonterminal(form[i])) {
        if (i < nt_pos) nt_pos = i;
        break;  // leftmost found; terminals after it counted below
      }
      ++terminal_count;
    }
    for (size_t i = nt_pos; i < form.size(); ++i) {
      if (!IsNonterminal(form[i])) ++terminal_count;
    }
    if (terminal_count > max_len) continue;
    if (nt_pos == form.size()) {
      std::string s;
      s.reserve(form.size());
      for (SymbolId t : form) s.push_back(static_cast<char>(t));
      done.insert(std::move(s));
      continue;
    }
    for (int32_t pi : g.ProductionsOf(form[nt_pos])) {
      if (g.augmented() && pi == g.augmented_production()) continue;
      const Production& p = g.production(pi);
      std::vector<SymbolId> next;
      next.reserve(form.size() + p.rhs.size());
      next.insert(next.end(), form.begin(), form.begin() + nt_pos);
      next.insert(next.end(), p.rhs.begin(), p.rhs.end());
      next.insert(next.end(), form.begin() + nt_pos + 1, form.end());
      if (seen.insert(next).second) queue.push_back(std::move(next));
    }
  }
  std::vector<std::string> out(done.begin(), done.end());
  std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

std::vector<std::string> EnumerateUniverse(const Grammar& g, size_t max_len) {
  std::vector<uint8_t> alphabet;
  g.terminals().ForEach([&](uint8_t b) { alphabet.push_back(b); });
  std::vector<std::string> out{""};
  std::vector<std::string> layer{""};
  for (size_t len = 1; len <= max_len; ++len) {
    std::vector<std::string> next;
    next.reserve(layer.size() * alphabet.size());
    for (const std::string& s : layer) {
      for (uint8_t b : alphabet) next.push_back(s + static_cast<char>(b));
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

std::string SampleSentence(const Grammar& g, std::mt19937_64* rng,
                           size_t soft_len_limit) {
  for (;;) {
    std::string out;
    std::vector<SymbolId> pending{g.start()};  // treated as a stack, reversed
    bool overflow = false;
    while (!pending.empty()) {
      SymbolId s = pending.back();
      pending.pop_back();
      if (!IsNonterminal(s)) {
        out.push_back(static_cast<char>(s));
        if (out.size() > soft_len_limit * 4) {
          overflow = true;
          break;
        }
        continue;
      }
      const std::vector<int32_t>& prods = g.ProductionsOf(s);
      std::vector<int32_t> usable;
      for (int32_t pi : prods) {
        if (g.augmented() && pi == g.augmented_production()) continue;
        usable.push_back(pi);
      }
      // Once past the soft limit, prefer the shortest rhs to wind down.
      int32_t choice;
      if (out.size() + pending.size() > soft_len_limit) {
        choice = *std::min_element(usable.begin(), usable.end(),
                                   [&](int32_t a, int32_t b) {
                                     return g.production(a).rhs.size() <
                                            g.production(b).rhs.size();
                                   });
      } else {
        choice = usable[(*rng)() % usable.size()];
      }
      const Production& p = g.production(choice);
      for (auto it = p.rhs.rbegin(); it != p.rhs.rend(); ++it) pending.push_back(*it);
      if (pending.size() > soft_len_limit * 16) {
        overflow = true;
        break;
      }
    }
    if (!overflow) return out;
  }
}

std::string MutateString(const std::string& s, const ByteSet& alphabet,
                         std::mt19937_64* rng) {
  std::vector<uint8_t> bytes;
  alphabet.ForEach([&](uint8_t b) { bytes.push_back(b); });
  std::string out = s;
  switch ((*rng)() % 4) {
    case 0: {  // flip one byte
      if (out.empty()) break;
      size_t pos = (*rng)() % out.size();
      out[pos] = static_cast<char>(bytes[(*rng)() % bytes.size()]);
      break;
    }
    case 1: {  // insert a byte
      size_t pos = (*rng)() % (out.size() + 1);
      out.insert(out.begin() + pos,
                 static_cast<char>(bytes[(*rng)() % bytes.size()]));
      break;
    }
    case 2: {  // delete a byte
      if (out.empty()) break;
      out.erase(out.begin() + (*rng)() % out.size());
      break;
    }
    default: {  // truncate
      if (out.empty()) break;
      out.resize((*rng)() % out.size());
      break;
    }
  }
  return out;
}

}  // namespace gmask::testing
