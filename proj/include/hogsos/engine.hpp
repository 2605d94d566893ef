#pragma once

// Operational model of an HO specification on closed terms.

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "hogsos/ho_spec.hpp"

namespace hogsos {

// Either a reduct, or a suspended application: the labelled rule that fired
// together with the arguments and the argument behaviours it was given.
class DetBehavior {
 public:
  enum class Kind : std::uint8_t { Reduce, Fun };

  static DetBehavior reduce(Term t, std::size_t rule);
  static DetBehavior fun(std::size_t rule, std::vector<Term> args,
                         std::vector<DetBehavior> arg_behaviors);

  Kind kind() const { return kind_; }
  bool is_reduce() const { return kind_ == Kind::Reduce; }
  bool is_fun() const { return kind_ == Kind::Fun; }
  const Term& reduct() const;
  // Index into HOSpec::rules() of the rule that produced this behaviour.
  std::size_t rule() const { return rule_; }
  const std::vector<Term>& args() const { return fun_->args; }
  const std::vector<DetBehavior>& arg_behaviors() const { return fun_->arg_behaviors; }

  // Reduce: by reduct only. Fun: by (rule, args, argument behaviours).
  friend bool operator==(const DetBehavior& a, const DetBehavior& b);
  friend std::strong_ordering operator<=>(const DetBehavior& a, const DetBehavior& b);

 private:
  struct FunData {
    std::vector<Term> args;
    std::vector<DetBehavior> arg_behaviors;
  };
  DetBehavior() = default;

  Kind kind_ = Kind::Reduce;
  std::size_t rule_ = 0;
  std::optional<Term> reduct_;
  std::shared_ptr<const FunData> fun_;
};

// Sorted and duplicate-free.
struct NondetBehavior {
  std::vector<DetBehavior> members;

  bool contains(const DetBehavior& b) const;
  friend bool operator==(const NondetBehavior&, const NondetBehavior&) = default;
};

struct Trace {
  enum class Terminal : std::uint8_t { Fun, Budget };
  std::vector<Term> terms;
  Terminal terminal = Terminal::Budget;
};

class Engine {
 public:
  static constexpr std::size_t kDefaultCacheCapacity = std::size_t{1} << 20;

  // capacity 0 disables memoization.
  explicit Engine(std::shared_ptr<const HOSpec> spec,
                  std::size_t cache_capacity = kDefaultCacheCapacity);

  const HOSpec& spec() const { return *spec_; }
  const std::shared_ptr<const HOSpec>& spec_ptr() const { return spec_; }
  const Signature& sig() const { return spec_->sig(); }
  bool deterministic() const { return spec_->mode() == Mode::Deterministic; }

  // Deterministic specs only.
  DetBehavior step(const Term& t) const;
  NondetBehavior step_nd(const Term& t) const;

  // Throws Error if b is a Reduce.
  Term apply(const DetBehavior& b, const Term& e) const;

  // Follows reductions for at most max_steps. Under a nondeterministic spec
  // each step takes the least member of step_nd.
  Trace trace(const Term& t, std::size_t max_steps) const;

  const std::string& rule_name(const DetBehavior& b) const { return spec_->rule(b.rule()).name; }
  std::string print(const Term& t) const { return print_term(t, sig()); }
  std::string print(const DetBehavior& b) const;

  std::size_t cache_size() const;
  void clear_cache() const;

 private:
  using Members = std::shared_ptr<const std::vector<DetBehavior>>;

  Members behaviours(const Term& t) const;
  Members compute(const Term& t) const;
  Term instantiate(const Term& conclusion, const std::vector<Term>& args,
                   const std::vector<const DetBehavior*>& beh, const Term* label) const;

  std::shared_ptr<const HOSpec> spec_;
  std::size_t capacity_;

  struct Lru {
    std::list<std::pair<Term, Members>> order;
    std::unordered_map<Term, std::list<std::pair<Term, Members>>::iterator> index;
  };
  mutable std::mutex mutex_;
  mutable Lru cache_;
};

std::string print_trace(const Trace& tr, const Signature& sig);

}  // namespace hogsos
