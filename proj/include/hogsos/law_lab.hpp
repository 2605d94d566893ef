#pragma once

// Exhaustive checks, on small finite sets, that a law
//   rho_{X,Y} : Sigma(X x B(X,Y)) -> B(X, Sigma*(X+Y)),  B(X,Y) = Y + Y^X
// is dinatural in X and natural in Y.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hogsos/ho_spec.hpp"

namespace hogsos {

// A law on finite sets; returns every admissible result (one for a
// deterministic law).
using Law = std::function<std::vector<LawValue>(std::size_t nx, std::size_t ny, const LawInput&)>;

Law spec_law(std::shared_ptr<const HOSpec> spec);

// Agrees with spec_law except on the infix application with a function-like
// first argument: the second argument's state is inspected, and only state 0
// is passed to the function. Not expressible as rules.
Law label_inspecting_mutant(std::shared_ptr<const HOSpec> spec);

struct FiniteInstance {
  std::size_t nx = 1;          // |X|
  std::size_t nx2 = 1;         // |X'|
  std::size_t ny = 1;          // |Y|
  std::size_t ny2 = 1;         // |Y'|
  std::vector<std::size_t> f;  // X -> X'
  std::vector<std::size_t> g;  // Y -> Y'
};

struct LawCounterexample {
  FiniteInstance inst;
  std::string input;
  std::string leg1, leg2;
};

struct LawReport {
  std::size_t instances = 0;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<LawCounterexample> counterexamples;  // the first few
  bool ok() const { return failures == 0; }
};

inline constexpr std::size_t kLawSetLimit = 3;
inline constexpr std::size_t kLawArityLimit = 3;
inline constexpr std::size_t kLawCheckBudget = 1'000'000;

// Every w in Sigma(X x B(X',Y)); throws Error above the budget.
LawReport check_dinaturality(const Signature& sig, const Law& law, const FiniteInstance& inst);
// Every w in Sigma(X x B(X,Y)) against g : Y -> Y'.
LawReport check_naturality_y(const Signature& sig, const Law& law, const FiniteInstance& inst);

// All set sizes 0..max_set and all function tables.
LawReport sweep_dinaturality(const Signature& sig, const Law& law, std::size_t max_set);
LawReport sweep_naturality_y(const Signature& sig, const Law& law, std::size_t max_set);

// Number of law inputs over the given sets; used for budgeting.
std::size_t count_law_inputs(const Signature& sig, std::size_t nx, std::size_t nfun,
                             std::size_t ny);

}  // namespace hogsos
