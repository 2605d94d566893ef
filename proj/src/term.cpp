#include "hogsos/term.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace hogsos {

ParseError::ParseError(const std::string& what, std::size_t position)
    : Error(what + " at offset " + std::to_string(position)), position_(position) {}

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(std::vector<OpDecl> ops) {
  for (auto& op : ops) add(std::move(op));
}

OpId Signature::add(OpDecl op) {
  if (op.name.empty()) throw Error("operator name must not be empty");
  if (by_name_.contains(op.name)) throw Error("duplicate operator '" + op.name + "'");
  if (op.infix) {
    if (op.arity != 2) throw Error("infix operator '" + op.name + "' must be binary");
    if (infix_) throw Error("at most one infix operator may be declared");
  }
  const auto id = static_cast<OpId>(ops_.size());
  if (op.infix) infix_ = id;
  by_name_.emplace(op.name, id);
  ops_.push_back(std::move(op));
  return id;
}

std::optional<OpId> Signature::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

bool Signature::has_constants() const {
  return std::any_of(ops_.begin(), ops_.end(), [](const OpDecl& o) { return o.arity == 0; });
}

// ---------------------------------------------------------------------------
// Term

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Term Term::op(OpId head, std::vector<Term> args) {
  std::size_t size = 1;
  std::size_t metas = 0;
  std::size_t h = mix(0x51ed270b27ULL, head);
  for (const auto& a : args) {
    size += a.size();
    metas += a.meta_count();
    h = mix(h, a.hash());
  }
  h = mix(h, args.size());
  return Term(std::make_shared<const Node>(
      Node{Kind::Op, static_cast<std::int64_t>(head), std::move(args), size, metas, h}));
}

Term Term::meta(MetaId id) {
  const std::size_t h = mix(0x2545f4914fULL, static_cast<std::size_t>(id));
  return Term(std::make_shared<const Node>(Node{Kind::Meta, id, {}, 1, 1, h}));
}

OpId Term::head() const {
  if (!is_op()) throw Error("head() on a metavariable");
  return static_cast<OpId>(node_->label);
}

MetaId Term::meta_id() const {
  if (!is_meta()) throw Error("meta_id() on an operator term");
  return node_->label;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.size != y.size || x.kind != y.kind || x.label != y.label) return false;
  return std::equal(x.args.begin(), x.args.end(), y.args.begin(), y.args.end());
}

std::strong_ordering operator<=>(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (auto c = x.size <=> y.size; c != 0) return c;
  // Metavariables sort before operators of the same size.
  if (auto c =
          static_cast<int>(x.kind == Term::Kind::Op) <=> static_cast<int>(y.kind == Term::Kind::Op);
      c != 0)
    return c;
  if (auto c = x.label <=> y.label; c != 0) return c;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (auto c = x.args[i] <=> y.args[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '\'' || c == '^' || c >= 0x80;
}

class TermParser {
 public:
  TermParser(std::string_view src, const Signature& sig, const MetaResolver& resolve)
      : src_(src), sig_(sig), resolve_(resolve) {}

  Term parse() {
    Term t = parse_app();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool at_atom_start() {
    skip_ws();
    if (pos_ >= src_.size()) return false;
    const auto c = static_cast<unsigned char>(src_[pos_]);
    return c == '(' || ident_char(c);
  }

  Term parse_app() {
    Term left = parse_atom();
    while (at_atom_start()) {
      const std::size_t at = pos_;
      Term right = parse_atom();
      const auto infix = sig_.infix_op();
      if (!infix) throw ParseError("juxtaposition needs an infix operator in the signature", at);
      left = Term::op(*infix, {std::move(left), std::move(right)});
    }
    return left;
  }

  std::string_view ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    return src_.substr(start, pos_ - start);
  }

  Term parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    if (src_[pos_] == '(') {
      ++pos_;
      Term inner = parse_app();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    const std::size_t start = pos_;
    const std::string_view name = ident();
    if (name.empty()) fail("expected a symbol");
    if (auto id = sig_.find(name)) {
      const auto& decl = sig_.op(*id);
      if (decl.arity == 0) return Term::op(*id);
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '(') {
        throw ParseError("operator '" + std::string(name) + "' expects " +
                             std::to_string(decl.arity) + " argument(s)",
                         start);
      }
      ++pos_;
      std::vector<Term> args;
      args.push_back(parse_app());
      skip_ws();
      while (pos_ < src_.size() && src_[pos_] == ',') {
        ++pos_;
        args.push_back(parse_app());
        skip_ws();
      }
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')' or ','");
      ++pos_;
      if (args.size() != decl.arity) {
        throw ParseError("arity mismatch for '" + std::string(name) + "': expected " +
                             std::to_string(decl.arity) + ", got " + std::to_string(args.size()),
                         start);
      }
      return Term::op(*id, std::move(args));
    }
    if (resolve_) {
      if (auto m = resolve_(name)) return Term::meta(*m);
    }
    throw ParseError("unknown symbol '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  const Signature& sig_;
  const MetaResolver& resolve_;
  std::size_t pos_ = 0;
};

bool is_infix_app(const Term& t, const Signature& sig) {
  return t.is_op() && sig.infix_op() && t.head() == *sig.infix_op();
}

void print_into(std::ostringstream& out, const Term& t, const Signature& sig,
                const MetaPrinter& print_meta) {
  if (t.is_meta()) {
    if (print_meta) {
      out << print_meta(t.meta_id());
    } else {
      out << '?' << t.meta_id();
    }
    return;
  }
  const auto& decl = sig.op(t.head());
  if (is_infix_app(t, sig)) {
    for (std::size_t i = 0; i < 2; ++i) {
      if (i == 1) out << ' ';
      const bool paren = is_infix_app(t.arg(i), sig);
      if (paren) out << '(';
      print_into(out, t.arg(i), sig, print_meta);
      if (paren) out << ')';
    }
    return;
  }
  out << decl.name;
  if (decl.arity == 0) return;
  out << '(';
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) out << ',';
    print_into(out, t.arg(i), sig, print_meta);
  }
  out << ')';
}

}  // namespace

Term parse_term(std::string_view src, const Signature& sig, const MetaResolver& resolve) {
  return TermParser(src, sig, resolve).parse();
}

std::string print_term(const Term& t, const Signature& sig, const MetaPrinter& print_meta) {
  std::ostringstream out;
  print_into(out, t, sig, print_meta);
  return out.str();
}

// ---------------------------------------------------------------------------
// Substitution and enumeration

Term subst_meta(const Term& t, const MetaEnv& env) {
  if (t.is_meta()) {
    auto it = env.find(t.meta_id());
    if (it == env.end()) throw Error("unbound metavariable ?" + std::to_string(t.meta_id()));
    return it->second;
  }
  if (t.closed()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(subst_meta(a, env));
  return Term::op(t.head(), std::move(args));
}

namespace {

// Appends every way of building op(args) with the given argument sizes.
void product_into(OpId head, std::span<const std::size_t> sizes,
                  const std::vector<std::vector<Term>>& by_size, std::vector<Term>& current,
                  std::vector<Term>& out) {
  if (current.size() == sizes.size()) {
    out.push_back(Term::op(head, current));
    return;
  }
  for (const auto& t : by_size[sizes[current.size()]]) {
    current.push_back(t);
    product_into(head, sizes, by_size, current, out);
    current.pop_back();
  }
}

void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& current,
                  const std::function<void(std::span<const std::size_t>)>& emit) {
  if (parts == 0) {
    if (total == 0) emit(current);
    return;
  }
  const std::size_t min_rest = parts - 1;
  for (std::size_t first = 1; first + min_rest <= total; ++first) {
    current.push_back(first);
    compositions(total - first, parts - 1, current, emit);
    current.pop_back();
  }
}

std::vector<std::vector<Term>> closed_by_size(const Signature& sig, std::size_t max_size) {
  if (max_size < 1) throw Error("max_size must be at least 1");
  if (!sig.has_constants()) throw Error("signature has no constants: no closed terms exist");
  std::vector<std::vector<Term>> by_size(max_size + 1);
  for (std::size_t s = 1; s <= max_size; ++s) {
    auto& bucket = by_size[s];
    for (OpId id = 0; id < sig.size(); ++id) {
      const std::size_t n = sig.op(id).arity;
      if (n == 0) {
        if (s == 1) bucket.push_back(Term::op(id));
        continue;
      }
      if (s - 1 < n) continue;
      std::vector<std::size_t> parts;
      compositions(s - 1, n, parts, [&](std::span<const std::size_t> sizes) {
        std::vector<Term> current;
        product_into(id, sizes, by_size, current, bucket);
      });
    }
    std::sort(bucket.begin(), bucket.end());
  }
  return by_size;
}

}  // namespace

std::vector<Term> enumerate_closed(const Signature& sig, std::size_t max_size) {
  auto by_size = closed_by_size(sig, max_size);
  std::vector<Term> out;
  for (auto& bucket : by_size) out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

std::vector<Term> enumerate_closed_of_size(const Signature& sig, std::size_t size) {
  return std::move(closed_by_size(sig, size)[size]);
}

// ---------------------------------------------------------------------------
// Contexts

Context::Context(Term t) : term_(std::move(t)) {
  if (term_.meta_count() != 1) throw Error("a context needs exactly one hole");
  // The single Meta leaf must be the hole.
  const Term* cur = &term_;
  while (cur->is_op()) {
    const Term* next = nullptr;
    for (const auto& a : cur->args()) {
      if (!a.closed()) next = &a;
    }
    cur = next;
  }
  if (cur->meta_id() != kHole) throw Error("context hole must be the metavariable x");
}

Term plug(const Context& c, const Term& t) {
  return subst_meta(c.term(), MetaEnv{{Context::kHole, t}});
}

Context parse_context(std::string_view src, const Signature& sig) {
  return Context(parse_term(src, sig, [](std::string_view name) -> std::optional<MetaId> {
    if (name == "x") return Context::kHole;
    return std::nullopt;
  }));
}

std::string print_context(const Context& c, const Signature& sig) {
  return print_term(c.term(), sig, [](MetaId) { return std::string("x"); });
}

}  // namespace hogsos
