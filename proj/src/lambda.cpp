#include "hogsos/lambda.hpp"

#include <algorithm>
#include <cctype>

namespace hogsos::lambda {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
}

}  // namespace

// Node-level algorithms; friend of LamTerm.
struct Impl {
  using Node = LamTerm::Node;
  using NodePtr = LamTerm::NodePtr;

  static LamTerm wrap(std::size_t stage, NodePtr n) { return LamTerm(stage, std::move(n)); }
  static const NodePtr& node(const LamTerm& t) { return t.node_; }

  static NodePtr var(std::size_t i) {
    return LamTerm::make(LamTerm::Kind::Var, i, nullptr, nullptr);
  }
  static NodePtr lam(NodePtr b) {
    return LamTerm::make(LamTerm::Kind::Lam, 0, std::move(b), nullptr);
  }
  static NodePtr app(NodePtr l, NodePtr r) {
    return LamTerm::make(LamTerm::Kind::App, 0, std::move(l), std::move(r));
  }

  // table maps free variables; m is the current target stage.
  static NodePtr rename(const NodePtr& n, std::vector<std::size_t>& table, std::size_t m) {
    switch (n->kind) {
      case LamTerm::Kind::Var:
        return var(table[n->index]);
      case LamTerm::Kind::Lam: {
        table.push_back(m);
        NodePtr b = rename(n->a, table, m + 1);
        table.pop_back();
        return lam(std::move(b));
      }
      case LamTerm::Kind::App:
        return app(rename(n->a, table, m), rename(n->b, table, m));
    }
    return nullptr;
  }

  static NodePtr up_node(const NodePtr& n, std::size_t stage) {
    std::vector<std::size_t> table(stage);
    for (std::size_t i = 0; i < stage; ++i) table[i] = i;
    return rename(n, table, stage + 1);
  }

  // env holds terms at stage m.
  static NodePtr subst(const NodePtr& n, const std::vector<NodePtr>& env, std::size_t m) {
    switch (n->kind) {
      case LamTerm::Kind::Var:
        return env[n->index];
      case LamTerm::Kind::Lam: {
        std::vector<NodePtr> inner;
        inner.reserve(env.size() + 1);
        for (const auto& u : env) inner.push_back(up_node(u, m));
        inner.push_back(var(m));
        return lam(subst(n->a, inner, m + 1));
      }
      case LamTerm::Kind::App:
        return app(subst(n->a, env, m), subst(n->b, env, m));
    }
    return nullptr;
  }
};

LamTerm::NodePtr LamTerm::make(Kind k, std::size_t index, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->index = index;
  n->size = 1 + (a ? a->size : 0) + (b ? b->size : 0);
  std::size_t h = mix(static_cast<std::size_t>(k) + 1, index);
  if (a) h = mix(h, a->hash);
  if (b) h = mix(h, b->hash);
  n->hash = h;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

LamTerm LamTerm::var(std::size_t stage, std::size_t i) {
  if (i >= stage) {
    throw Error("variable " + std::to_string(i) + " out of scope at stage " +
                std::to_string(stage));
  }
  return LamTerm(stage, make(Kind::Var, i, nullptr, nullptr));
}

LamTerm LamTerm::lam(const LamTerm& body) {
  if (body.stage_ == 0) throw Error("abstraction body must live at stage >= 1");
  return LamTerm(body.stage_ - 1, make(Kind::Lam, 0, body.node_, nullptr));
}

LamTerm LamTerm::app(const LamTerm& l, const LamTerm& r) {
  if (l.stage_ != r.stage_) throw Error("application operands at different stages");
  return LamTerm(l.stage_, make(Kind::App, 0, l.node_, r.node_));
}

std::size_t LamTerm::index() const {
  if (!is_var()) throw Error("not a variable");
  return node_->index;
}

LamTerm LamTerm::body() const {
  if (!is_lam()) throw Error("not an abstraction");
  return LamTerm(stage_ + 1, node_->a);
}

LamTerm LamTerm::left() const {
  if (!is_app()) throw Error("not an application");
  return LamTerm(stage_, node_->a);
}

LamTerm LamTerm::right() const {
  if (!is_app()) throw Error("not an application");
  return LamTerm(stage_, node_->b);
}

bool LamTerm::equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->size != b->size || a->kind != b->kind || a->index != b->index) {
    return false;
  }
  if (a->a && !equal(a->a.get(), b->a.get())) return false;
  if (a->b && !equal(a->b.get(), b->b.get())) return false;
  return true;
}

std::strong_ordering LamTerm::compare(const Node* a, const Node* b) {
  if (a == b) return std::strong_ordering::equal;
  if (auto c = a->size <=> b->size; c != 0) return c;
  if (auto c = a->kind <=> b->kind; c != 0) return c;
  if (auto c = a->index <=> b->index; c != 0) return c;
  if (a->a) {
    if (auto c = compare(a->a.get(), b->a.get()); c != 0) return c;
  }
  if (a->b) return compare(a->b.get(), b->b.get());
  return std::strong_ordering::equal;
}

bool operator==(const LamTerm& a, const LamTerm& b) {
  return a.stage_ == b.stage_ && LamTerm::equal(a.node_.get(), b.node_.get());
}

std::strong_ordering operator<=>(const LamTerm& a, const LamTerm& b) {
  if (auto c = a.stage_ <=> b.stage_; c != 0) return c;
  return LamTerm::compare(a.node_.get(), b.node_.get());
}

// ---------------------------------------------------------------------------

Renaming::Renaming(std::size_t source_, std::size_t target_, std::vector<std::size_t> table_)
    : source(source_), target(target_), table(std::move(table_)) {
  if (table.size() != source) throw Error("renaming table has the wrong length");
  for (std::size_t v : table) {
    if (v >= target) throw Error("renaming entry out of range");
  }
}

Renaming Renaming::identity(std::size_t n) {
  std::vector<std::size_t> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = i;
  return Renaming(n, n, std::move(t));
}

Renaming Renaming::old(std::size_t n) {
  std::vector<std::size_t> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = i;
  return Renaming(n, n + 1, std::move(t));
}

Renaming compose(const Renaming& s, const Renaming& r) {
  if (r.target != s.source) throw Error("renamings do not compose");
  std::vector<std::size_t> t(r.source);
  for (std::size_t i = 0; i < r.source; ++i) t[i] = s.table[r.table[i]];
  return Renaming(r.source, s.target, std::move(t));
}

LamTerm rename(const LamTerm& t, const Renaming& r) {
  if (t.stage() != r.source) throw Error("renaming source does not match the term's stage");
  std::vector<std::size_t> table = r.table;
  return Impl::wrap(r.target, Impl::rename(Impl::node(t), table, r.target));
}

LamTerm up(const LamTerm& t) { return rename(t, Renaming::old(t.stage())); }

LamTerm swap(const LamTerm& t) {
  if (t.stage() < 2) throw Error("swap needs stage >= 2");
  const std::size_t n = t.stage() - 2;
  auto table = Renaming::identity(n).table;
  table.push_back(n + 1);
  table.push_back(n);
  return rename(t, Renaming(n + 2, n + 2, std::move(table)));
}

LamTerm contract(const LamTerm& t) {
  if (t.stage() < 2) throw Error("contract needs stage >= 2");
  const std::size_t n = t.stage() - 2;
  auto table = Renaming::identity(n).table;
  table.push_back(n);
  table.push_back(n);
  return rename(t, Renaming(n + 2, n + 1, std::move(table)));
}

LamTerm subst(const LamTerm& t, std::span<const LamTerm> us, std::optional<std::size_t> target) {
  if (us.size() != t.stage()) throw Error("substitution length does not match the term's stage");
  std::size_t m = 0;
  if (!us.empty()) {
    m = us.front().stage();
    if (target && *target != m) throw Error("substitution target stage mismatch");
  } else if (target) {
    m = *target;
  } else {
    throw Error("empty substitution needs an explicit target stage");
  }
  std::vector<Impl::NodePtr> env;
  env.reserve(us.size());
  for (const auto& u : us) {
    if (u.stage() != m) throw Error("substitution entries at different stages");
    env.push_back(Impl::node(u));
  }
  return Impl::wrap(m, Impl::subst(Impl::node(t), env, m));
}

LamTerm subst1(const LamTerm& b, const LamTerm& e) {
  if (b.stage() != e.stage() + 1) throw Error("subst1: body must be one stage above the argument");
  std::vector<LamTerm> us;
  us.reserve(b.stage());
  for (std::size_t i = 0; i < e.stage(); ++i) us.push_back(LamTerm::var(e.stage(), i));
  us.push_back(e);
  return subst(b, us, e.stage());
}

// ---------------------------------------------------------------------------

std::string_view style_name(Style s) { return s == Style::CBN ? "cbn" : "cbv"; }

std::optional<Style> parse_style(std::string_view s) {
  if (s == "cbn") return Style::CBN;
  if (s == "cbv") return Style::CBV;
  return std::nullopt;
}

const LamTerm& LamBehavior::reduct() const {
  if (!is_reduce()) throw Error("behaviour is not a reduction");
  return *term;
}

const LamTerm& LamBehavior::body() const {
  if (!is_fun()) throw Error("behaviour is not an abstraction");
  return *term;
}

namespace {

LamBehavior reduce(LamTerm t, const char* rule) {
  return LamBehavior{LamBehavior::Kind::Reduce, std::move(t), rule};
}
LamBehavior stuck(const char* rule) {
  return LamBehavior{LamBehavior::Kind::Stuck, std::nullopt, rule};
}

}  // namespace

LamBehavior step_cbn(const LamTerm& t) {
  switch (t.kind()) {
    case LamTerm::Kind::Var:
      return stuck("var");
    case LamTerm::Kind::Lam:
      return LamBehavior{LamBehavior::Kind::Fun, t.body(), "lam"};
    case LamTerm::Kind::App: {
      const LamBehavior b1 = step_cbn(t.left());
      if (b1.is_reduce()) return reduce(LamTerm::app(b1.reduct(), t.right()), "app1");
      if (b1.is_fun()) return reduce(subst1(b1.body(), t.right()), "app2");
      return stuck("app3");
    }
  }
  return stuck("var");
}

LamBehavior step_cbv(const LamTerm& t) {
  switch (t.kind()) {
    case LamTerm::Kind::Var:
      return stuck("var");
    case LamTerm::Kind::Lam:
      return LamBehavior{LamBehavior::Kind::Fun, t.body(), "lam"};
    case LamTerm::Kind::App: {
      const LamBehavior b1 = step_cbv(t.left());
      if (b1.is_reduce()) return reduce(LamTerm::app(b1.reduct(), t.right()), "app2");
      if (b1.is_stuck()) return stuck("app4");
      const LamBehavior b2 = step_cbv(t.right());
      if (b2.is_reduce()) return reduce(LamTerm::app(t.left(), b2.reduct()), "app3");
      return reduce(subst1(b1.body(), t.right()), "app1");
    }
  }
  return stuck("var");
}

LamBehavior step(const LamTerm& t, Style style) {
  return style == Style::CBN ? step_cbn(t) : step_cbv(t);
}

LamTerm apply(const LamBehavior& b, const LamTerm& e) { return subst1(b.body(), e); }

WhnfKind whnf_kind(const LamTerm& t) {
  LamTerm head = t;
  std::size_t spine = 0;
  while (head.is_app()) {
    head = head.left();
    ++spine;
  }
  if (head.is_var()) return WhnfKind{WhnfKind::Kind::HeadVariable, head.index(), spine};
  if (spine == 0) return WhnfKind{WhnfKind::Kind::Abstraction, 0, 0};
  return WhnfKind{WhnfKind::Kind::Reducible, 0, 0};
}

LamTrace trace_lambda(const LamTerm& t, Style style, std::size_t max_steps) {
  LamTrace tr;
  tr.terms.push_back(t);
  for (std::size_t steps = 0;; ++steps) {
    const LamBehavior b = step(tr.terms.back(), style);
    if (b.is_fun()) {
      tr.terminal = LamTrace::Terminal::Fun;
      return tr;
    }
    if (b.is_stuck()) {
      tr.terminal = LamTrace::Terminal::Stuck;
      return tr;
    }
    if (steps == max_steps) {
      tr.terminal = LamTrace::Terminal::Budget;
      return tr;
    }
    tr.terms.push_back(b.reduct());
  }
}

// ---------------------------------------------------------------------------
// Surface syntax

namespace {

class LamParser {
 public:
  LamParser(std::string_view src, std::size_t stage) : src_(src), stage_(stage) {}

  LamTerm parse() {
    LamTerm t = expr(0);
    skip();
    if (pos_ != src_.size()) fail("unexpected input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos_), pos_);
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool at_lambda() {
    skip();
    if (pos_ < src_.size() && src_[pos_] == '\\') return true;
    return src_.substr(pos_, 2) == "\xCE\xBB";  // U+03BB
  }

  bool at_atom() {
    skip();
    return pos_ < src_.size() &&
           (src_[pos_] == '(' || std::isdigit(static_cast<unsigned char>(src_[pos_])));
  }

  LamTerm expr(std::size_t depth) {
    std::optional<LamTerm> acc;
    for (;;) {
      LamTerm next = LamTerm::var(1, 0);
      if (at_lambda()) {
        pos_ += src_[pos_] == '\\' ? 1 : 2;
        skip();
        if (pos_ >= src_.size() || src_[pos_] != '.') fail("expected '.' after binder");
        ++pos_;
        next = LamTerm::lam(expr(depth + 1));
        acc = acc ? LamTerm::app(*acc, next) : next;
        return *acc;  // the body extends as far right as possible
      }
      if (!at_atom()) break;
      next = atom(depth);
      acc = acc ? LamTerm::app(*acc, next) : next;
    }
    if (!acc) fail("expected a term");
    return *acc;
  }

  LamTerm atom(std::size_t depth) {
    if (src_[pos_] == '(') {
      ++pos_;
      LamTerm t = expr(depth);
      skip();
      if (pos_ >= src_.size() || src_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return t;
    }
    const std::size_t start = pos_;
    std::size_t idx = 0;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      idx = idx * 10 + static_cast<std::size_t>(src_[pos_] - '0');
      if (idx > 1'000'000) fail("index too large");
      ++pos_;
    }
    const std::size_t here = stage_ + depth;
    if (idx >= here) {
      pos_ = start;
      fail("index " + std::to_string(idx) + " is not bound");
    }
    return LamTerm::var(here, here - 1 - idx);
  }

  std::string_view src_;
  std::size_t stage_;
  std::size_t pos_ = 0;
};

void print_into(const LamTerm& t, std::string& out) {
  switch (t.kind()) {
    case LamTerm::Kind::Var:
      out += std::to_string(t.stage() - 1 - t.index());
      return;
    case LamTerm::Kind::Lam:
      out += "\\.";
      print_into(t.body(), out);
      return;
    case LamTerm::Kind::App: {
      const LamTerm l = t.left();
      const LamTerm r = t.right();
      if (l.is_lam()) {
        out += '(';
        print_into(l, out);
        out += ')';
      } else {
        print_into(l, out);
      }
      out += ' ';
      if (r.is_var()) {
        print_into(r, out);
      } else {
        out += '(';
        print_into(r, out);
        out += ')';
      }
      return;
    }
  }
}

}  // namespace

LamTerm parse_lambda(std::string_view src, std::size_t stage) {
  return LamParser(src, stage).parse();
}

std::string print_lambda(const LamTerm& t) {
  std::string out;
  print_into(t, out);
  return out;
}

std::vector<LamTerm> enumerate_closed_lambda(std::size_t max_size) {
  // table[s][k]: terms at stage s with exactly k nodes; stage s <= max_size.
  std::vector<std::vector<std::vector<LamTerm>>> table(
      max_size + 1, std::vector<std::vector<LamTerm>>(max_size + 1));
  for (std::size_t k = 1; k <= max_size; ++k) {
    for (std::size_t s = 0; s + k <= max_size + 1 && s <= max_size; ++s) {
      auto& bucket = table[s][k];
      if (k == 1) {
        for (std::size_t i = 0; i < s; ++i) bucket.push_back(LamTerm::var(s, i));
        continue;
      }
      if (s + 1 <= max_size) {
        for (const auto& b : table[s + 1][k - 1]) bucket.push_back(LamTerm::lam(b));
      }
      for (std::size_t a = 1; a + 1 < k; ++a) {
        for (const auto& l : table[s][a]) {
          for (const auto& r : table[s][k - 1 - a]) bucket.push_back(LamTerm::app(l, r));
        }
      }
      std::sort(bucket.begin(), bucket.end());
    }
  }
  std::vector<LamTerm> out;
  for (std::size_t k = 1; k <= max_size; ++k) {
    out.insert(out.end(), table[0][k].begin(), table[0][k].end());
  }
  return out;
}

std::vector<LamTerm> enumerate_lambda_of_size(std::size_t stage, std::size_t size) {
  if (size == 0) return {};
  std::vector<LamTerm> out;
  if (size == 1) {
    for (std::size_t i = 0; i < stage; ++i) out.push_back(LamTerm::var(stage, i));
    return out;
  }
  for (const auto& b : enumerate_lambda_of_size(stage + 1, size - 1))
    out.push_back(LamTerm::lam(b));
  for (std::size_t a = 1; a + 1 < size; ++a) {
    const auto ls = enumerate_lambda_of_size(stage, a);
    if (ls.empty()) continue;
    const auto rs = enumerate_lambda_of_size(stage, size - 1 - a);
    for (const auto& l : ls) {
      for (const auto& r : rs) out.push_back(LamTerm::app(l, r));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

LamTerm omega() {
  const LamTerm w = LamTerm::lam(LamTerm::app(LamTerm::var(1, 0), LamTerm::var(1, 0)));
  return LamTerm::app(w, w);
}

LamTerm identity() { return LamTerm::lam(LamTerm::var(1, 0)); }

// ---------------------------------------------------------------------------

LamContext::LamContext(std::vector<Frame> frames) : frames_(std::move(frames)) {
  std::size_t stage = 0;
  for (const auto& f : frames_) {
    if (f.kind == Frame::Kind::Lam) {
      if (f.other) throw Error("abstraction frame carries no operand");
      ++stage;
    } else if (!f.other || f.other->stage() != stage) {
      throw Error("application frame operand at the wrong stage");
    }
  }
}

std::size_t LamContext::hole_stage() const {
  std::size_t s = 0;
  for (const auto& f : frames_) s += f.kind == Frame::Kind::Lam ? 1 : 0;
  return s;
}

std::size_t LamContext::size() const {
  std::size_t n = 1;
  for (const auto& f : frames_) n += 1 + (f.other ? f.other->size() : 0);
  return n;
}

LamTerm plug(const LamContext& c, const LamTerm& t) {
  if (t.stage() != 0) throw Error("only closed terms can be plugged");
  LamTerm acc = t;
  for (std::size_t i = 0; i < c.hole_stage(); ++i) acc = up(acc);
  for (auto it = c.frames().rbegin(); it != c.frames().rend(); ++it) {
    switch (it->kind) {
      case LamContext::Frame::Kind::Lam:
        acc = LamTerm::lam(acc);
        break;
      case LamContext::Frame::Kind::AppLeft:
        acc = LamTerm::app(acc, *it->other);
        break;
      case LamContext::Frame::Kind::AppRight:
        acc = LamTerm::app(*it->other, acc);
        break;
    }
  }
  return acc;
}

std::string print_lambda_context(const LamContext& c) {
  // Same bracketing as print_lambda, with the hole as an atom.
  using Kind = LamContext::Frame::Kind;
  std::string out = "[]";
  std::optional<Kind> top;  // outermost frame rendered so far; none for the hole
  for (auto it = c.frames().rbegin(); it != c.frames().rend(); ++it) {
    switch (it->kind) {
      case Kind::Lam:
        out = "\\." + out;
        break;
      case Kind::AppLeft: {
        const LamTerm& r = *it->other;
        const std::string right = r.is_var() ? print_lambda(r) : "(" + print_lambda(r) + ")";
        out = (top == Kind::Lam ? "(" + out + ")" : out) + " " + right;
        break;
      }
      case Kind::AppRight: {
        const LamTerm& l = *it->other;
        const std::string left = l.is_lam() ? "(" + print_lambda(l) + ")" : print_lambda(l);
        out = left + " " + (top ? "(" + out + ")" : out);
        break;
      }
    }
    top = it->kind;
  }
  return out;
}

}  // namespace hogsos::lambda
