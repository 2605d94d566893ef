#pragma once

// Shared helpers for the unit tests: seeded generators and small oracles
// that do not reuse library code paths.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hogsos/instances.hpp"
#include "hogsos/lambda.hpp"
#include "hogsos/term.hpp"

namespace testing {

inline constexpr std::uint64_t kSeed = 0x5eed5eedULL;

inline const hogsos::Engine& ski() { return *hogsos::builtin("skiu").engine; }
inline const hogsos::Engine& ski_nd() { return *hogsos::builtin("skiu_nd").engine; }
inline hogsos::Term ski_term(const std::string& s) { return hogsos::parse_term(s, ski().sig()); }

inline std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Random closed first-order term with at most `budget` nodes.
inline hogsos::Term random_term(const hogsos::Signature& sig, std::mt19937_64& rng,
                                std::size_t budget) {
  std::vector<hogsos::OpId> fits;
  for (hogsos::OpId op = 0; op < sig.size(); ++op) {
    if (sig.op(op).arity + 1 <= budget) fits.push_back(op);
  }
  const hogsos::OpId op = fits[pick(rng, fits.size())];
  const std::size_t n = sig.op(op).arity;
  std::vector<hogsos::Term> args;
  std::size_t left = budget - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t reserve = n - i - 1;
    const std::size_t share = 1 + pick(rng, left - reserve);
    args.push_back(random_term(sig, rng, share));
    left -= args.back().size();
  }
  return hogsos::Term::op(op, std::move(args));
}

// Random lambda term at `stage` with at most `budget` nodes; budget must be
// at least 2 for closed terms.
inline hogsos::lambda::LamTerm random_lambda(std::size_t stage, std::mt19937_64& rng,
                                             std::size_t budget) {
  using hogsos::lambda::LamTerm;
  const std::size_t min = stage > 0 ? 1 : 2;
  std::vector<int> kinds;
  if (stage > 0) kinds.push_back(0);
  if (budget >= 2) kinds.push_back(1);
  if (budget >= 1 + 2 * min) kinds.push_back(2);
  switch (kinds[pick(rng, kinds.size())]) {
    case 0:
      return LamTerm::var(stage, pick(rng, stage));
    case 1:
      return LamTerm::lam(random_lambda(stage + 1, rng, budget - 1));
    default: {
      const std::size_t l = min + pick(rng, budget - 2 * min);
      auto left = random_lambda(stage, rng, l);
      auto right = random_lambda(stage, rng, budget - 1 - left.size());
      return LamTerm::app(left, right);
    }
  }
}

}  // namespace testing
