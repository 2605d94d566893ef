#pragma once

// Staged de Bruijn lambda terms.
//
// Internally a term at stage n has free variables {0..n-1}, and a binder at
// stage n binds variable n (levels: the bound variable is the newest one).
// The surface syntax uses conventional indices instead (0 is the innermost
// binder, then outward into the ambient context); parse_lambda and
// print_lambda convert.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hogsos/term.hpp"

namespace hogsos::lambda {

class LamTerm {
 public:
  enum class Kind : std::uint8_t { Var, Lam, App };

  // Throws Error if i >= stage.
  static LamTerm var(std::size_t stage, std::size_t i);
  // Body at stage n+1; result at stage n. Throws Error if body.stage() == 0.
  static LamTerm lam(const LamTerm& body);
  // Throws Error on a stage mismatch.
  static LamTerm app(const LamTerm& l, const LamTerm& r);

  std::size_t stage() const { return stage_; }
  Kind kind() const { return node_->kind; }
  bool is_var() const { return node_->kind == Kind::Var; }
  bool is_lam() const { return node_->kind == Kind::Lam; }
  bool is_app() const { return node_->kind == Kind::App; }
  std::size_t index() const;  // Var
  LamTerm body() const;       // Lam; at stage()+1
  LamTerm left() const;       // App
  LamTerm right() const;      // App

  std::size_t size() const { return node_->size; }
  std::size_t hash() const { return node_->hash ^ (stage_ * 0x9E3779B97F4A7C15ULL); }

  friend bool operator==(const LamTerm& a, const LamTerm& b);
  friend std::strong_ordering operator<=>(const LamTerm& a, const LamTerm& b);

 private:
  struct Node {
    Kind kind;
    std::size_t index;
    std::shared_ptr<const Node> a, b;
    std::size_t size;
    std::size_t hash;
  };
  using NodePtr = std::shared_ptr<const Node>;

  LamTerm(std::size_t stage, NodePtr node) : stage_(stage), node_(std::move(node)) {}
  static NodePtr make(Kind k, std::size_t index, NodePtr a, NodePtr b);
  static bool equal(const Node* a, const Node* b);
  static std::strong_ordering compare(const Node* a, const Node* b);

  friend struct Impl;

  std::size_t stage_;
  NodePtr node_;
};

struct Renaming {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<std::size_t> table;  // length source, entries < target

  // Throws Error on an ill-formed table.
  Renaming(std::size_t source, std::size_t target, std::vector<std::size_t> table);
  static Renaming identity(std::size_t n);
  static Renaming old(std::size_t n);  // n -> n+1, i |-> i

  // (s . r)(i) = s(r(i)).
  friend Renaming compose(const Renaming& s, const Renaming& r);
  friend bool operator==(const Renaming&, const Renaming&) = default;
};

LamTerm rename(const LamTerm& t, const Renaming& r);
LamTerm up(const LamTerm& t);        // stage n -> n+1
LamTerm swap(const LamTerm& t);      // stage n+2, exchanges the two newest variables
LamTerm contract(const LamTerm& t);  // stage n+2 -> n+1, identifies the two newest

// Simultaneous substitution t[us]. us.size() must equal t.stage(); every
// element lives at the target stage, which must be given when us is empty.
LamTerm subst(const LamTerm& t, std::span<const LamTerm> us,
              std::optional<std::size_t> target_stage = std::nullopt);
// Substitutes e (stage n) for the newest variable of b (stage n+1).
LamTerm subst1(const LamTerm& b, const LamTerm& e);

enum class Style : std::uint8_t { CBN, CBV };
std::string_view style_name(Style s);
std::optional<Style> parse_style(std::string_view s);

// One-step behaviour. For Fun, `term` is the abstraction body (stage n+1).
// Rule ids: "var", "lam", then for CBN "app1" (head reduces), "app2" (beta),
// "app3" (stuck head); for CBV "app2" (head reduces), "app3" (argument
// reduces), "app1" (beta), "app4" (stuck head).
struct LamBehavior {
  enum class Kind : std::uint8_t { Reduce, Fun, Stuck };
  Kind kind = Kind::Stuck;
  std::optional<LamTerm> term;
  std::string rule;

  bool is_reduce() const { return kind == Kind::Reduce; }
  bool is_fun() const { return kind == Kind::Fun; }
  bool is_stuck() const { return kind == Kind::Stuck; }
  const LamTerm& reduct() const;
  const LamTerm& body() const;

  friend bool operator==(const LamBehavior&, const LamBehavior&) = default;
};

LamBehavior step_cbn(const LamTerm& t);
LamBehavior step_cbv(const LamTerm& t);
LamBehavior step(const LamTerm& t, Style style);

// Throws Error unless b is Fun and e has b's source stage.
LamTerm apply(const LamBehavior& b, const LamTerm& e);

struct WhnfKind {
  enum class Kind : std::uint8_t { Reducible, Abstraction, HeadVariable };
  Kind kind = Kind::Reducible;
  std::size_t var = 0;    // HeadVariable: the head's level
  std::size_t spine = 0;  // HeadVariable: number of arguments
  friend bool operator==(const WhnfKind&, const WhnfKind&) = default;
};

// Purely syntactic; independent of the evaluation style.
WhnfKind whnf_kind(const LamTerm& t);

struct LamTrace {
  enum class Terminal : std::uint8_t { Fun, Stuck, Budget };
  std::vector<LamTerm> terms;
  Terminal terminal = Terminal::Budget;
};

LamTrace trace_lambda(const LamTerm& t, Style style, std::size_t max_steps);

// Surface syntax: `\ . body`, juxtaposition (left associative), parentheses,
// and nonnegative de Bruijn indices. An abstraction body extends as far
// right as possible. Throws ParseError.
LamTerm parse_lambda(std::string_view src, std::size_t stage = 0);
std::string print_lambda(const LamTerm& t);

// Closed terms (stage 0) with at most max_size nodes, ordered by size, then
// Var < Lam < App, then components.
std::vector<LamTerm> enumerate_closed_lambda(std::size_t max_size);
// Terms at `stage` with exactly `size` nodes, in the same order.
std::vector<LamTerm> enumerate_lambda_of_size(std::size_t stage, std::size_t size);

// Closed terms used by tests and instances.
LamTerm omega();     // (\.0 0)(\.0 0)
LamTerm identity();  // \.0

// A one-hole context for closed plugging. Frames are listed outermost first;
// the hole sits at stage = number of Lam frames.
class LamContext {
 public:
  struct Frame {
    enum class Kind : std::uint8_t { Lam, AppLeft, AppRight } kind;
    // AppLeft: hole is the left operand and `other` the right; AppRight the
    // converse. `other` lives at the stage of the frame.
    std::optional<LamTerm> other;
    friend bool operator==(const Frame&, const Frame&) = default;
  };

  LamContext() = default;
  // Throws Error if the frames' stages are inconsistent.
  explicit LamContext(std::vector<Frame> frames);

  const std::vector<Frame>& frames() const { return frames_; }
  std::size_t hole_stage() const;
  // Node count, counting the hole as one node.
  std::size_t size() const;

  friend bool operator==(const LamContext&, const LamContext&) = default;

 private:
  std::vector<Frame> frames_;
};

// t must be closed; it is weakened to the hole's stage.
LamTerm plug(const LamContext& c, const LamTerm& t);
std::string print_lambda_context(const LamContext& c);

}  // namespace hogsos::lambda

template <>
struct std::hash<hogsos::lambda::LamTerm> {
  std::size_t operator()(const hogsos::lambda::LamTerm& t) const noexcept { return t.hash(); }
};
