#pragma once

// Random one-hole contexts and the congruence property harness.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hogsos/bisim.hpp"
#include "hogsos/instances.hpp"

namespace hogsos {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

// Uniform over the feasible sizes 1..max_size, then uniform among the
// contexts of the chosen size. Throws Error if max_size < 1.
Context gen_context(const Signature& sig, std::size_t max_size, std::uint64_t seed);
// Same, for closed lambda contexts (binders included).
lambda::LamContext gen_lambda_context(std::size_t max_size, std::uint64_t seed);

// Number of one-hole contexts with exactly `size` nodes (the hole counts as
// one). Saturates at UINT64_MAX.
std::uint64_t count_contexts(const Signature& sig, std::size_t size);
std::uint64_t count_lambda_contexts(std::size_t size);

struct CongruenceParams {
  std::size_t n_contexts = 200;
  std::size_t max_context_size = 5;
  std::size_t depth = 8;
  std::size_t probe_size = 3;
  bool opaque_probe = false;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
};

struct PairOutcome {
  std::string left, right;
  bool accepted = false;  // passed pre-verification
  Verdict pre;
  std::size_t contexts_tested = 0;
};

struct CongruenceCounterexample {
  std::size_t pair = 0;
  std::size_t context = 0;
  std::string context_text;
  std::string left, right;  // plugged terms
  Verdict verdict;
};

struct CongruenceReport {
  std::string instance;
  std::string header;
  CongruenceParams params;
  std::vector<PairOutcome> pairs;
  std::vector<std::string> contexts;
  std::vector<CongruenceCounterexample> counterexamples;

  bool ok() const;  // every pair accepted and no counterexample
};

// Pre-verifies each pair at the given bounds; rejected pairs are reported and
// not plugged. Results are ordered by (pair, context) whatever the thread
// count.
CongruenceReport congruence_test(const InstanceBundle& instance,
                                 const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const CongruenceParams& params);

}  // namespace hogsos
