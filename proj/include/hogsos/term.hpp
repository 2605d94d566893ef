#pragma once

// First-order terms over a ranked signature, with metavariable leaves.
//
// Terms are immutable, structurally shared values. Equality and hashing are
// structural; ordering is the canonical enumeration order (size first, then
// head symbol declaration order, then arguments left to right).

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hogsos {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

using OpId = std::uint32_t;
using MetaId = std::int64_t;

struct OpDecl {
  std::string name;
  std::size_t arity = 0;
  bool infix = false;

  friend bool operator==(const OpDecl&, const OpDecl&) = default;
};

class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<OpDecl> ops);

  // Throws Error on a duplicate name or a malformed infix declaration.
  OpId add(OpDecl op);

  const OpDecl& op(OpId id) const { return ops_.at(id); }
  std::optional<OpId> find(std::string_view name) const;
  std::size_t size() const { return ops_.size(); }
  std::span<const OpDecl> ops() const { return ops_; }

  // The binary symbol written as juxtaposition, if declared.
  std::optional<OpId> infix_op() const { return infix_; }
  bool has_constants() const;

  friend bool operator==(const Signature& a, const Signature& b) { return a.ops_ == b.ops_; }

 private:
  std::vector<OpDecl> ops_;
  std::unordered_map<std::string, OpId> by_name_;
  std::optional<OpId> infix_;
};

class Term {
 public:
  enum class Kind : std::uint8_t { Op, Meta };

  static Term op(OpId head, std::vector<Term> args = {});
  static Term meta(MetaId id);

  Kind kind() const { return node_->kind; }
  bool is_op() const { return node_->kind == Kind::Op; }
  bool is_meta() const { return node_->kind == Kind::Meta; }
  OpId head() const;
  MetaId meta_id() const;
  std::span<const Term> args() const { return node_->args; }
  const Term& arg(std::size_t i) const { return node_->args.at(i); }

  // Node count.
  std::size_t size() const { return node_->size; }
  std::size_t hash() const { return node_->hash; }
  bool closed() const { return node_->metas == 0; }
  std::size_t meta_count() const { return node_->metas; }

  bool same_node(const Term& other) const { return node_ == other.node_; }

  friend bool operator==(const Term& a, const Term& b);
  friend std::strong_ordering operator<=>(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::int64_t label;  // OpId for Op, MetaId for Meta
    std::vector<Term> args;
    std::size_t size;
    std::size_t metas;
    std::size_t hash;
  };
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

using MetaResolver = std::function<std::optional<MetaId>(std::string_view)>;
using MetaPrinter = std::function<std::string(MetaId)>;

// term := sym | sym '(' term (',' term)* ')' | term term | '(' term ')'
// Juxtaposition denotes the signature's infix symbol and associates to the
// left. Identifiers that are not operators are handed to `resolve`.
Term parse_term(std::string_view src, const Signature& sig, const MetaResolver& resolve = {});

// Inverse of parse_term: application spines print as "(S K) I".
std::string print_term(const Term& t, const Signature& sig, const MetaPrinter& print_meta = {});

using MetaEnv = std::unordered_map<MetaId, Term>;

// Replaces every Meta leaf by its binding. Throws Error on an unbound id.
Term subst_meta(const Term& t, const MetaEnv& env);

// All closed terms with at most `max_size` nodes, in canonical order.
std::vector<Term> enumerate_closed(const Signature& sig, std::size_t max_size);

// Closed terms of exactly `size` nodes, in canonical order.
std::vector<Term> enumerate_closed_of_size(const Signature& sig, std::size_t size);

// A term over the single metavariable x in which x occurs exactly once.
class Context {
 public:
  static constexpr MetaId kHole = 0;

  // Throws Error unless `t` has exactly one Meta leaf, labelled kHole.
  explicit Context(Term t);
  static Context hole() { return Context(Term::meta(kHole)); }

  const Term& term() const { return term_; }
  std::size_t size() const { return term_.size(); }

  friend bool operator==(const Context&, const Context&) = default;

 private:
  Term term_;
};

Term plug(const Context& c, const Term& t);
Context parse_context(std::string_view src, const Signature& sig);
std::string print_context(const Context& c, const Signature& sig);

}  // namespace hogsos

template <>
struct std::hash<hogsos::Term> {
  std::size_t operator()(const hogsos::Term& t) const noexcept { return t.hash(); }
};
