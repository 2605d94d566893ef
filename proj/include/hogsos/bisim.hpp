#pragma once

// Depth-bounded bisimulation games.
//
// A game at remaining depth d compares the one-step behaviours of a pair and,
// when d > 0, recurses into the successor pairs: reducts against reducts, and
// applications at every probe. A pair revisited at a remaining depth no
// larger than the one it was first entered with is taken as related.
//
// NotBisimilar is definitive. BisimilarUpTo only says that no refutation
// exists within the given depth and probe set.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hogsos/engine.hpp"
#include "hogsos/lambda.hpp"

namespace hogsos {

template <class T>
struct BasicBisimParams {
  std::size_t depth = 8;
  std::vector<T> probes;  // closed terms, in the order they are tried
  bool opaque_probe = false;
  std::size_t renaming_samples = 8;
  std::size_t subst_samples = 8;
  std::uint64_t seed = 0;
};

using BisimParams = BasicBisimParams<Term>;
using LamBisimParams = BasicBisimParams<lambda::LamTerm>;

// 1..8 are the coalgebraic conditions (1 renaming, 2 substitution,
// 3-5 an unmatched reduction / function / stuck state on the left,
// 6-8 the same on the right). A1..A4 are the applicative clauses.
enum class Clause : std::uint8_t { C1 = 1, C2, C3, C4, C5, C6, C7, C8, A1, A2, A3, A4 };
std::string clause_id(Clause c);

struct WitnessStep {
  enum class Move : std::uint8_t { Reduce, Apply, Substitute };
  Move move = Move::Reduce;
  std::vector<std::size_t> probes;  // Apply: one index; Substitute: one per variable
  std::string label;                // printed probe or substitution
  std::string left, right;          // the pair after the move
  std::string left_rule, right_rule;
};

struct Witness {
  std::string left, right;  // the root pair
  std::vector<WitnessStep> path;
  Clause clause = Clause::C3;
  std::string left_behavior, right_behavior;  // at the last pair: reduce | fun | stuck
  // open_ext only: the closed substitution that separates the terms.
  std::vector<std::size_t> substitution;
  std::string substitution_text;
};

// Refutation of a nondeterministic pair: a member on one side that no member
// on the other side can answer.
struct NdRefutation {
  std::string left, right;
  bool challenger_left = true;
  std::size_t member = 0;  // index into the challenger's behaviour set
  Clause clause = Clause::C3;
  struct Answer {
    std::size_t candidate = 0;
    std::optional<std::size_t> probe;            // set when both are functions
    std::shared_ptr<const NdRefutation> reason;  // null on a variant mismatch
  };
  std::vector<Answer> answers;
};

struct Verdict {
  bool bisimilar = true;
  std::size_t depth = 0;
  std::uint64_t fingerprint = 0;  // of the probe list actually used
  std::optional<Witness> witness;
  std::shared_ptr<const NdRefutation> refutation;  // bisim_nd only
  std::size_t pairs_explored = 0;
};

std::string describe(const Verdict& v);

// FNV-1a over the printed probes, each terminated by '\n'.
std::uint64_t probe_fingerprint(const std::vector<std::string>& printed);

// The spec extended with a fresh constant "⊥" and the rule ⊥ -> ⊥.
std::shared_ptr<const HOSpec> with_opaque_probe(const HOSpec& spec);
inline constexpr std::string_view kOpaqueProbe = "\xE2\x8A\xA5";

// Closed probes of size at most s over the spec's signature.
std::vector<Term> default_probes(const Signature& sig, std::size_t size);
std::vector<lambda::LamTerm> default_lambda_probes(std::size_t size);

Verdict bisim_det(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p);
Verdict bisim_nd(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p);

// Strong applicative bisimilarity on closed terms.
Verdict appbisim(const lambda::LamTerm& t1, const lambda::LamTerm& t2, lambda::Style style,
                 const LamBisimParams& p);

// Open extension: appbisim on every closed instance drawn from probes^n.
Verdict open_ext(const lambda::LamTerm& t1, const lambda::LamTerm& t2, lambda::Style style,
                 const LamBisimParams& p);

// The generic coalgebraic game on lambda terms at any stage: conditions 2
// (closed substitutions drawn from the probes) and 3-8, with functions
// probed at the lifted closed probes and at the variables of the stage.
Verdict coalgebraic_bisim(const lambda::LamTerm& t1, const lambda::LamTerm& t2, lambda::Style style,
                          const LamBisimParams& p);

struct ClosureViolation {
  std::size_t pair = 0;  // index into the relation sample
  Clause clause = Clause::C3;
  std::string detail;
  Verdict verdict;
};

struct ClosureReport {
  std::size_t pairs = 0;
  std::size_t renamings_checked = 0;
  std::size_t substitutions_checked = 0;
  std::vector<ClosureViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Checks conditions 1 and 2 on sampled renamings and substitutions, and 3-8
// via coalgebraic_bisim, for every pair of a finite relation sample. The
// substitution samples include the variable substitution of every sampled
// renaming.
ClosureReport check_closure(const std::vector<std::pair<lambda::LamTerm, lambda::LamTerm>>& rel,
                            lambda::Style style, const LamBisimParams& p);

// Machine replay of refutations. Returns an empty string on success, or a
// description of the first discrepancy.
std::string replay(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p,
                   const Witness& w);
std::string replay_nd(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p,
                      const NdRefutation& r);
std::string replay_appbisim(const lambda::LamTerm& t1, const lambda::LamTerm& t2,
                            lambda::Style style, const LamBisimParams& p, const Witness& w);
std::string replay_coalgebraic(const lambda::LamTerm& t1, const lambda::LamTerm& t2,
                               lambda::Style style, const LamBisimParams& p, const Witness& w);

}  // namespace hogsos
