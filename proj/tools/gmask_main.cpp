// Command-line front end: compile a grammar to an automaton file, check
// strings against it, compute token masks, benchmark mask computation, and
// export the machine as a graphviz document.
//
// Exit codes: 0 ok, 1 input rejected / dead prefix, 2 grammar error,
// 3 budget or validation failure, 4 corrupt automaton or vocabulary file,
// 64 usage error.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gmask/dpda.hpp"
#include "gmask/grammar.hpp"
#include "gmask/lr1.hpp"
#include "gmask/runtime.hpp"
#include "gmask/serialize.hpp"

namespace {

using namespace gmask;

// Failure with a pre-decided process exit code.
struct CliError {
  int code;
  std::string message;
};

std::string ReadFile(const std::string& path, int fail_code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{fail_code, "cannot read " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw CliError{fail_code, "read error on " + path};
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) throw CliError{3, "cannot write " + path};
}

// Command-line strings may carry \xNN and \\ escapes so arbitrary bytes are
// expressible; a malformed escape is a usage error, not a file error.
std::string UnescapeArg(const std::string& s) {
  try {
    return UnescapeToken(s);
  } catch (const SerializeError& e) {
    throw CliError{64, std::string(e.what())};
  }
}

Engine LoadEngine(const std::string& path) {
  return Engine(DeserializeDpda(ReadFile(path, 4)));
}

std::vector<std::string> LoadVocab(const std::string& path) {
  return LoadVocabulary(ReadFile(path, 4));
}

double Ms(std::chrono::steady_clock::time_point a, std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

int DoCompile(const std::string& grammar_path, std::string out_path,
              const BuildOptions& options) {
  std::string text = ReadFile(grammar_path, 2);
  if (out_path.empty()) {
    out_path = std::filesystem::path(grammar_path).replace_extension(".dpda").string();
  }
  Grammar g = ParseGrammar(text);
  auto t0 = std::chrono::steady_clock::now();
  Dpda d = BuildDpda(g, options);
  auto t1 = std::chrono::steady_clock::now();
  std::string blob = SerializeDpda(d);
  WriteFile(out_path, blob);
  std::printf("states: %lld\n", static_cast<long long>(d.num_states));
  std::printf("edges: %zu (+%zu composite)\n", d.edges.size(), d.composites.size());
  std::printf("cycles: %zu\n", d.cycles.size());
  std::printf("build_ms: %.2f\n", Ms(t0, t1));
  std::printf("wrote: %s (%zu bytes)\n", out_path.c_str(), blob.size());
  return 0;
}

int DoCheck(const std::string& automaton_path, const std::string& raw_input) {
  Engine engine = LoadEngine(automaton_path);
  std::string input = UnescapeArg(raw_input);
  Engine::RunResult r = engine.RunSequence(engine.InitialConfig(), input, true);
  if (r.accepted) {
    std::printf("accepted (%lld steps)\n", static_cast<long long>(r.steps));
    return 0;
  }
  std::printf("rejected at offset %lld\n", static_cast<long long>(r.reject_offset));
  return 1;
}

int DoMask(const std::string& automaton_path, const std::string& vocab_path,
           const std::string& raw_prefix) {
  Engine engine = LoadEngine(automaton_path);
  std::vector<std::string> vocab = LoadVocab(vocab_path);
  TokenTrie trie = TokenTrie::Build(vocab);
  std::string prefix = UnescapeArg(raw_prefix);
  RuntimeConfig cfg = engine.InitialConfig();
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (!engine.Step(&cfg, static_cast<unsigned char>(prefix[i]))) {
      std::printf("rejected at offset %zu\n", i);
      return 1;
    }
  }
  std::printf("%s\n", engine.ComputeMask(cfg, trie).ToHex().c_str());
  return 0;
}

int DoExportDot(const std::string& automaton_path, const std::string& out_path) {
  Engine engine = LoadEngine(automaton_path);
  std::string dot = ExportDot(engine.dpda());
  WriteFile(out_path, dot);
  std::printf("wrote: %s (%zu bytes)\n", out_path.c_str(), dot.size());
  return 0;
}

struct LatencyStats {
  double mean_us = 0, p50_us = 0, p99_us = 0;
};

LatencyStats Summarize(std::vector<double> samples_us) {
  LatencyStats s;
  for (double v : samples_us) s.mean_us += v;
  s.mean_us /= static_cast<double>(samples_us.size());
  std::sort(samples_us.begin(), samples_us.end());
  auto rank = [&](double q) {
    size_t n = samples_us.size();
    size_t idx = static_cast<size_t>(std::max<long long>(
        0, static_cast<long long>(q * static_cast<double>(n) + 0.999999) - 1));
    return samples_us[std::min(idx, n - 1)];
  };
  s.p50_us = rank(0.50);
  s.p99_us = rank(0.99);
  return s;
}

int DoBench(const std::string& automaton_path, const std::string& vocab_path,
            std::vector<int64_t> batches, int64_t steps, uint64_t seed,
            int64_t token_limit) {
  Engine engine = LoadEngine(automaton_path);
  std::vector<std::string> vocab = LoadVocab(vocab_path);
  if (token_limit > 0) {
    if (token_limit > static_cast<int64_t>(vocab.size())) {
      throw CliError{64, "--tokens exceeds vocabulary size"};
    }
    vocab.resize(static_cast<size_t>(token_limit));
  }
  TokenTrie trie = TokenTrie::Build(vocab);

  std::printf("# automaton: %s  states: %lld  edges: %zu\n", automaton_path.c_str(),
              static_cast<long long>(engine.dpda().num_states), engine.dpda().edges.size());
  std::printf("# vocab: %s  tokens: %zu  steps: %lld  seed: %llu\n", vocab_path.c_str(),
              vocab.size(), static_cast<long long>(steps),
              static_cast<unsigned long long>(seed));

  for (int64_t batch : batches) {
    // Deterministic random walk: every sequence follows allowed bytes only,
    // restarting from the initial configuration when just the end marker
    // remains viable. Configurations are recorded per step before advancing.
    std::vector<std::vector<RuntimeConfig>> cfgs(static_cast<size_t>(batch));
    uint64_t digest = 1469598103934665603ull;  // FNV-1a over the chosen bytes
    auto fold = [&digest](uint8_t b) { digest = (digest ^ b) * 1099511628211ull; };
    for (int64_t b = 0; b < batch; ++b) {
      std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(b) + 1);
      RuntimeConfig cfg = engine.InitialConfig();
      cfgs[static_cast<size_t>(b)].reserve(static_cast<size_t>(steps));
      for (int64_t s = 0; s < steps; ++s) {
        cfgs[static_cast<size_t>(b)].push_back(cfg);
        TerminalSet allowed = engine.AllowedTerminals(cfg);
        std::vector<uint8_t> bytes;
        for (int v = 0; v < 256; ++v) {
          if (allowed.bytes.Test(static_cast<uint8_t>(v))) bytes.push_back(static_cast<uint8_t>(v));
        }
        if (bytes.empty()) {
          cfg = engine.InitialConfig();
          fold(0xff);
          continue;
        }
        uint8_t byte = bytes[rng() % bytes.size()];
        engine.Step(&cfg, byte);
        fold(byte);
      }
      fold(0xfe);
    }
    std::printf("batch=%lld prefix_digest=%016llx\n", static_cast<long long>(batch),
                static_cast<unsigned long long>(digest));

    // Each timing sample is the wall time to mask the whole batch once.
    uint64_t checksum_trie = 0, checksum_naive = 0;
    std::vector<double> trie_us, naive_us;
    trie_us.reserve(static_cast<size_t>(steps));
    naive_us.reserve(static_cast<size_t>(steps));
    for (int64_t s = 0; s < steps; ++s) {
      auto t0 = std::chrono::steady_clock::now();
      for (int64_t b = 0; b < batch; ++b) {
        TokenMask m = engine.ComputeMask(cfgs[static_cast<size_t>(b)][static_cast<size_t>(s)], trie);
        checksum_trie = checksum_trie * 31 + static_cast<uint64_t>(m.CountSet());
      }
      auto t1 = std::chrono::steady_clock::now();
      trie_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    for (int64_t s = 0; s < steps; ++s) {
      auto t0 = std::chrono::steady_clock::now();
      for (int64_t b = 0; b < batch; ++b) {
        TokenMask m =
            engine.ComputeMaskNaive(cfgs[static_cast<size_t>(b)][static_cast<size_t>(s)], vocab);
        checksum_naive = checksum_naive * 31 + static_cast<uint64_t>(m.CountSet());
      }
      auto t1 = std::chrono::steady_clock::now();
      naive_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }

    LatencyStats ts = Summarize(trie_us);
    LatencyStats ns = Summarize(naive_us);
    std::printf("batch=%lld path=trie mean_us=%.3f p50_us=%.3f p99_us=%.3f checksum=%016llx\n",
                static_cast<long long>(batch), ts.mean_us, ts.p50_us, ts.p99_us,
                static_cast<unsigned long long>(checksum_trie));
    std::printf("batch=%lld path=naive mean_us=%.3f p50_us=%.3f p99_us=%.3f checksum=%016llx\n",
                static_cast<long long>(batch), ns.mean_us, ns.p50_us, ns.p99_us,
                static_cast<unsigned long long>(checksum_naive));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Grammar-constrained decoding toolkit: compiles LR(1) grammars into "
      "stack-conditioned automata and computes exact per-token masks."};
  app.require_subcommand(1);

  // compile
  std::string grammar_path, out_path;
  BuildOptions options;
  bool no_aggregate = false, no_merge = false;
  CLI::App* compile = app.add_subcommand("compile", "compile a grammar file to an automaton");
  compile->add_option("grammar", grammar_path, "grammar file (BNF)")->required();
  compile->add_option("-o,--out", out_path, "output path (default: grammar path with .dpda)");
  compile->add_flag("--no-aggregate", no_aggregate, "keep one edge per terminal (no byte grouping)");
  compile->add_flag("--no-merge", no_merge, "do not build two-terminal composite edges");
  compile->add_flag("--conservative-cycles", options.conservative_cycles,
                    "rewrite every elementary shift circuit (not language-preserving)");
  compile->add_option("--budget", options.edge_budget_factor,
                      "edge budget factor (allowed edges = factor x states x 257)")
      ->check(CLI::NonNegativeNumber);
  compile->add_option("--state-ceiling", options.state_ceiling, "max LR(1) states")
      ->check(CLI::PositiveNumber);

  // check
  std::string automaton_path, input_string;
  CLI::App* check = app.add_subcommand("check", "run a string through an automaton");
  check->add_option("automaton", automaton_path, "compiled automaton file")->required();
  check->add_option("input", input_string, "input string (\\xNN and \\\\ escapes allowed)")
      ->required();

  // mask
  std::string vocab_path, prefix_string;
  CLI::App* mask = app.add_subcommand("mask", "print the token mask after a prefix");
  mask->add_option("automaton", automaton_path, "compiled automaton file")->required();
  mask->add_option("vocab", vocab_path, "vocabulary file (JSON array of strings)")->required();
  mask->add_option("prefix", prefix_string, "prefix string (\\xNN and \\\\ escapes allowed)")
      ->required();

  // bench
  std::vector<int64_t> batches{1};
  int64_t steps = 32;
  uint64_t seed = 0;
  int64_t token_limit = 0;
  CLI::App* bench = app.add_subcommand("bench", "time mask computation (trie vs naive)");
  bench->add_option("automaton", automaton_path, "compiled automaton file")->required();
  bench->add_option("vocab", vocab_path, "vocabulary file (JSON array of strings)")->required();
  bench->add_option("--batch", batches, "batch sizes (repeatable)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--steps", steps, "decode steps per sequence")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "random walk seed");
  bench->add_option("--tokens", token_limit, "use only the first N vocabulary tokens")
      ->check(CLI::PositiveNumber);

  // export-dot
  std::string dot_path;
  CLI::App* export_dot = app.add_subcommand("export-dot", "write a graphviz view of an automaton");
  export_dot->add_option("automaton", automaton_path, "compiled automaton file")->required();
  export_dot->add_option("out", dot_path, "output .dot path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 64;
  }

  try {
    if (*compile) {
      options.aggregate = !no_aggregate;
      options.merge = !no_merge;
      return DoCompile(grammar_path, out_path, options);
    }
    if (*check) return DoCheck(automaton_path, input_string);
    if (*mask) return DoMask(automaton_path, vocab_path, prefix_string);
    if (*bench) return DoBench(automaton_path, vocab_path, batches, steps, seed, token_limit);
    if (*export_dot) return DoExportDot(automaton_path, dot_path);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return e.code;
  } catch (const GrammarError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const BuildError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == BuildError::Kind::kNotLR1Conflict ? 2 : 3;
  } catch (const SerializeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const VocabError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 64;
}
