#include "hogsos/bisim.hpp"

#include <algorithm>
#include <unordered_map>

namespace hogsos {

using lambda::LamBehavior;
using lambda::LamTerm;
using lambda::Style;

std::string clause_id(Clause c) {
  const auto v = static_cast<int>(c);
  if (v <= 8) return std::to_string(v);
  return "A" + std::to_string(v - 8);
}

std::uint64_t probe_fingerprint(const std::vector<std::string>& printed) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& s : printed) {
    for (unsigned char c : s) feed(c);
    feed('\n');
  }
  return h;
}

std::string describe(const Verdict& v) {
  if (v.bisimilar) {
    return "BisimilarUpTo(depth " + std::to_string(v.depth) + ")";
  }
  std::string out = "NotBisimilar";
  if (v.witness) out += " (clause " + clause_id(v.witness->clause) + ")";
  if (v.refutation) out += " (clause " + clause_id(v.refutation->clause) + ")";
  return out;
}

std::shared_ptr<const HOSpec> with_opaque_probe(const HOSpec& spec) {
  Signature sig = spec.sig();
  const OpId bottom = sig.add(OpDecl{std::string(kOpaqueProbe), 0, false});
  std::vector<HORule> rules(spec.rules().begin(), spec.rules().end());
  HORule r;
  r.name = "opaque";
  r.op = bottom;
  r.arity = 0;
  r.shape = 0;
  r.kind = RuleKind::Unlabelled;
  r.conclusion = Term::op(bottom);
  rules.push_back(std::move(r));
  return std::make_shared<const HOSpec>(spec.name() + "+opaque", std::move(sig), std::move(rules),
                                        spec.mode());
}

std::vector<Term> default_probes(const Signature& sig, std::size_t size) {
  return enumerate_closed(sig, size);
}

std::vector<LamTerm> default_lambda_probes(std::size_t size) {
  return lambda::enumerate_closed_lambda(size);
}

namespace {

enum class BKind : std::uint8_t { Reduce, Fun, Stuck };

const char* kind_name(BKind k) {
  switch (k) {
    case BKind::Reduce:
      return "reduce";
    case BKind::Fun:
      return "fun";
    case BKind::Stuck:
      return "stuck";
  }
  return "?";
}

Clause left_clause(BKind k) {
  return k == BKind::Reduce ? Clause::C3 : k == BKind::Fun ? Clause::C4 : Clause::C5;
}
Clause right_clause(BKind k) {
  return k == BKind::Reduce ? Clause::C6 : k == BKind::Fun ? Clause::C7 : Clause::C8;
}

template <class S>
struct PairHash {
  std::size_t operator()(const std::pair<S, S>& p) const noexcept {
    const std::size_t a = std::hash<S>{}(p.first);
    const std::size_t b = std::hash<S>{}(p.second);
    return a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  }
};

// Odometer over probes^n, first position slowest.
std::vector<std::vector<std::size_t>> tuples(std::size_t k, std::size_t n, std::size_t cap) {
  std::vector<std::vector<std::size_t>> out;
  if (k == 0 && n > 0) return out;
  std::vector<std::size_t> cur(n, 0);
  for (;;) {
    out.push_back(cur);
    if (out.size() >= cap) return out;
    std::size_t i = n;
    while (i > 0 && ++cur[i - 1] == k) cur[--i] = 0;
    if (i == 0) return out;
  }
}

constexpr std::size_t kMaxSubstitutions = 4096;

// ---------------------------------------------------------------------------
// Generic deterministic game. Sys supplies step/kind/reduct/apply, the probes
// for a state, and (for staged systems) closed substitutions.

template <class Sys>
class DetGame {
 public:
  using State = typename Sys::State;

  explicit DetGame(const Sys& sys) : sys_(sys) {}

  Verdict run(const State& a, const State& b, std::size_t depth) {
    Verdict v;
    v.depth = depth;
    v.fingerprint = sys_.fingerprint();
    Witness w;
    w.left = sys_.print(a);
    w.right = sys_.print(b);
    if (!play(a, b, depth, w)) {
      w.path = path_;
      v.bisimilar = false;
      v.witness = std::move(w);
    }
    v.pairs_explored = explored_;
    return v;
  }

 private:
  bool play(const State& a, const State& b, std::size_t d, Witness& w) {
    ++explored_;
    if (a == b) return true;
    auto key = std::make_pair(a, b);
    if (auto it = visited_.find(key); it != visited_.end() && it->second >= d) return true;
    visited_[key] = d;

    const std::size_t n = sys_.subst_arity(a);
    if (n > 0 && d > 0) {
      for (const auto& u : tuples(sys_.closed_probes().size(), n, kMaxSubstitutions)) {
        const State a2 = sys_.substitute(a, u);
        const State b2 = sys_.substitute(b, u);
        path_.push_back(WitnessStep{WitnessStep::Move::Substitute, u, sys_.print_subst(u),
                                    sys_.print(a2), sys_.print(b2), "", ""});
        if (!play(a2, b2, d - 1, w)) return false;
        path_.pop_back();
      }
    }

    const auto ba = sys_.step(a);
    const auto bb = sys_.step(b);
    const BKind ka = sys_.kind(ba);
    const BKind kb = sys_.kind(bb);
    if (ka != kb) {
      w.clause = left_clause(ka);
      w.left_behavior = kind_name(ka);
      w.right_behavior = kind_name(kb);
      return false;
    }
    if (d == 0) return true;
    if (ka == BKind::Reduce) {
      const State a2 = sys_.reduct(ba);
      const State b2 = sys_.reduct(bb);
      path_.push_back(WitnessStep{WitnessStep::Move::Reduce,
                                  {},
                                  "",
                                  sys_.print(a2),
                                  sys_.print(b2),
                                  sys_.rule(ba),
                                  sys_.rule(bb)});
      if (!play(a2, b2, d - 1, w)) return false;
      path_.pop_back();
    } else if (ka == BKind::Fun) {
      const auto& probes = sys_.probes_at(a);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const State a2 = sys_.apply(ba, probes[i]);
        const State b2 = sys_.apply(bb, probes[i]);
        path_.push_back(WitnessStep{WitnessStep::Move::Apply,
                                    {i},
                                    sys_.print(probes[i]),
                                    sys_.print(a2),
                                    sys_.print(b2),
                                    sys_.rule(ba),
                                    sys_.rule(bb)});
        if (!play(a2, b2, d - 1, w)) return false;
        path_.pop_back();
      }
    }
    return true;
  }

  const Sys& sys_;
  std::unordered_map<std::pair<State, State>, std::size_t, PairHash<State>> visited_;
  std::vector<WitnessStep> path_;
  std::size_t explored_ = 0;
};

// First-order systems given by an engine.
struct SkiSys {
  using State = Term;

  const Engine& eng;
  std::vector<Term> probes;

  DetBehavior step(const Term& t) const { return eng.step(t); }
  BKind kind(const DetBehavior& b) const { return b.is_reduce() ? BKind::Reduce : BKind::Fun; }
  Term reduct(const DetBehavior& b) const { return b.reduct(); }
  Term apply(const DetBehavior& b, const Term& e) const { return eng.apply(b, e); }
  std::string rule(const DetBehavior& b) const { return eng.rule_name(b); }
  std::string print(const Term& t) const { return eng.print(t); }
  const std::vector<Term>& probes_at(const Term&) const { return probes; }
  const std::vector<Term>& closed_probes() const { return probes; }
  std::size_t subst_arity(const Term&) const { return 0; }
  Term substitute(const Term& t, const std::vector<std::size_t>&) const { return t; }
  std::string print_subst(const std::vector<std::size_t>&) const { return ""; }
  std::uint64_t fingerprint() const {
    std::vector<std::string> printed;
    for (const auto& p : probes) printed.push_back(print(p));
    return probe_fingerprint(printed);
  }
};

// Lambda terms at any stage, with the coalgebra given by the step function
// and substitution.
struct LamSys {
  using State = LamTerm;

  Style style;
  std::vector<LamTerm> probes;  // closed
  mutable std::unordered_map<std::size_t, std::vector<LamTerm>> lifted;

  LamBehavior step(const LamTerm& t) const { return lambda::step(t, style); }
  BKind kind(const LamBehavior& b) const {
    return b.is_reduce() ? BKind::Reduce : b.is_fun() ? BKind::Fun : BKind::Stuck;
  }
  LamTerm reduct(const LamBehavior& b) const { return b.reduct(); }
  LamTerm apply(const LamBehavior& b, const LamTerm& e) const { return lambda::apply(b, e); }
  std::string rule(const LamBehavior& b) const { return b.rule; }
  std::string print(const LamTerm& t) const { return lambda::print_lambda(t); }
  const std::vector<LamTerm>& probes_at(const LamTerm& t) const {
    const std::size_t n = t.stage();
    auto it = lifted.find(n);
    if (it != lifted.end()) return it->second;
    std::vector<LamTerm> out;
    for (const auto& p : probes) {
      LamTerm q = p;
      for (std::size_t i = 0; i < n; ++i) q = lambda::up(q);
      out.push_back(q);
    }
    for (std::size_t i = 0; i < n; ++i) out.push_back(LamTerm::var(n, i));
    return lifted.emplace(n, std::move(out)).first->second;
  }
  const std::vector<LamTerm>& closed_probes() const { return probes; }
  std::size_t subst_arity(const LamTerm& t) const { return t.stage(); }
  LamTerm substitute(const LamTerm& t, const std::vector<std::size_t>& u) const {
    std::vector<LamTerm> us;
    for (std::size_t i : u) us.push_back(probes.at(i));
    return lambda::subst(t, us, 0);
  }
  std::string print_subst(const std::vector<std::size_t>& u) const {
    std::string out = "[";
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (i) out += ", ";
      out += print(probes.at(u[i]));
    }
    return out + "]";
  }
  std::uint64_t fingerprint() const {
    std::vector<std::string> printed;
    for (const auto& p : probes) printed.push_back(print(p));
    return probe_fingerprint(printed);
  }
};

struct PreparedEngine {
  std::unique_ptr<Engine> owned;
  const Engine* engine;
  std::vector<Term> probes;
};

PreparedEngine prepare(const Engine& engine, const BisimParams& p) {
  PreparedEngine out;
  out.engine = &engine;
  out.probes = p.probes;
  if (p.opaque_probe) {
    out.owned = std::make_unique<Engine>(with_opaque_probe(engine.spec()));
    out.engine = out.owned.get();
    const auto bottom = out.engine->sig().find(kOpaqueProbe);
    out.probes.insert(out.probes.begin(), Term::op(*bottom));
  }
  return out;
}

void check_closed(const Engine& engine, const Term& t) {
  if (!t.closed()) throw Error("bisimulation needs closed terms");
  (void)engine;
}

}  // namespace

Verdict bisim_det(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p) {
  check_closed(engine, t1);
  check_closed(engine, t2);
  auto prep = prepare(engine, p);
  SkiSys sys{*prep.engine, prep.probes};
  DetGame<SkiSys> game(sys);
  return game.run(t1, t2, p.depth);
}

// ---------------------------------------------------------------------------
// Nondeterministic game

namespace {

class NdGame {
 public:
  NdGame(const Engine& eng, const std::vector<Term>& probes) : eng_(eng), probes_(probes) {}

  std::shared_ptr<const NdRefutation> play(const Term& a, const Term& b, std::size_t d) {
    ++explored_;
    if (a == b) return nullptr;
    auto key = std::make_pair(a, b);
    if (auto it = failed_.find(key); it != failed_.end() && it->second.first <= d) {
      return it->second.second;
    }
    if (auto it = visited_.find(key); it != visited_.end() && it->second >= d) return nullptr;
    journal_.push_back(
        {key, visited_.count(key) ? std::optional<std::size_t>(visited_[key]) : std::nullopt});
    visited_[key] = d;

    const auto left = eng_.step_nd(a).members;
    const auto right = eng_.step_nd(b).members;
    for (int side = 0; side < 2; ++side) {
      const bool from_left = side == 0;
      const auto& mine = from_left ? left : right;
      const auto& theirs = from_left ? right : left;
      for (std::size_t m = 0; m < mine.size(); ++m) {
        const BKind km = mine[m].is_reduce() ? BKind::Reduce : BKind::Fun;
        auto ref = std::make_shared<NdRefutation>();
        bool matched = false;
        for (std::size_t c = 0; c < theirs.size() && !matched; ++c) {
          const BKind kc = theirs[c].is_reduce() ? BKind::Reduce : BKind::Fun;
          if (kc != km) {
            ref->answers.push_back({c, std::nullopt, nullptr});
            continue;
          }
          if (d == 0) {
            matched = true;
            break;
          }
          const DetBehavior& lb = from_left ? mine[m] : theirs[c];
          const DetBehavior& rb = from_left ? theirs[c] : mine[m];
          const std::size_t mark = journal_.size();
          std::shared_ptr<const NdRefutation> reason;
          std::optional<std::size_t> probe;
          if (km == BKind::Reduce) {
            reason = play(lb.reduct(), rb.reduct(), d - 1);
          } else {
            for (std::size_t i = 0; i < probes_.size() && !reason; ++i) {
              reason = play(eng_.apply(lb, probes_[i]), eng_.apply(rb, probes_[i]), d - 1);
              if (reason) probe = i;
            }
          }
          if (!reason) {
            matched = true;
          } else {
            rollback(mark);
            ref->answers.push_back({c, probe, reason});
          }
        }
        if (!matched) {
          ref->left = eng_.print(a);
          ref->right = eng_.print(b);
          ref->challenger_left = from_left;
          ref->member = m;
          ref->clause = from_left ? left_clause(km) : right_clause(km);
          failed_[key] = {d, ref};
          return ref;
        }
      }
    }
    return nullptr;
  }

  std::size_t explored() const { return explored_; }

 private:
  using Key = std::pair<Term, Term>;

  void rollback(std::size_t mark) {
    while (journal_.size() > mark) {
      auto& [key, prev] = journal_.back();
      if (prev) {
        visited_[key] = *prev;
      } else {
        visited_.erase(key);
      }
      journal_.pop_back();
    }
  }

  const Engine& eng_;
  const std::vector<Term>& probes_;
  std::unordered_map<Key, std::size_t, PairHash<Term>> visited_;
  std::unordered_map<Key, std::pair<std::size_t, std::shared_ptr<const NdRefutation>>,
                     PairHash<Term>>
      failed_;
  std::vector<std::pair<Key, std::optional<std::size_t>>> journal_;
  std::size_t explored_ = 0;
};

}  // namespace

Verdict bisim_nd(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p) {
  check_closed(engine, t1);
  check_closed(engine, t2);
  auto prep = prepare(engine, p);
  NdGame game(*prep.engine, prep.probes);
  Verdict v;
  v.depth = p.depth;
  v.fingerprint = SkiSys{*prep.engine, prep.probes}.fingerprint();
  v.refutation = game.play(t1, t2, p.depth);
  v.bisimilar = v.refutation == nullptr;
  v.pairs_explored = game.explored();
  return v;
}

// ---------------------------------------------------------------------------
// Applicative bisimilarity, written against the syntactic shape of terms.

namespace {

class AppGame {
 public:
  AppGame(Style style, const std::vector<LamTerm>& probes) : style_(style), probes_(probes) {}

  bool play(const LamTerm& a, const LamTerm& b, std::size_t d, Witness& w) {
    ++explored_;
    if (a == b) return true;
    auto key = std::make_pair(a, b);
    if (auto it = visited_.find(key); it != visited_.end() && it->second >= d) return true;
    visited_[key] = d;

    const Shape sa = shape(a);
    const Shape sb = shape(b);
    if (sa.kind != sb.kind) {
      // A1/A2 concern a reducing / abstraction left side; A3/A4 the right.
      if (sa.kind == BKind::Reduce) {
        w.clause = Clause::A1;
      } else if (sa.kind == BKind::Fun) {
        w.clause = Clause::A2;
      } else {
        w.clause = sb.kind == BKind::Reduce ? Clause::A3 : Clause::A4;
      }
      w.left_behavior = kind_name(sa.kind);
      w.right_behavior = kind_name(sb.kind);
      return false;
    }
    if (d == 0 || sa.kind == BKind::Stuck) return true;
    if (sa.kind == BKind::Reduce) {
      path_.push_back(WitnessStep{WitnessStep::Move::Reduce,
                                  {},
                                  "",
                                  lambda::print_lambda(*sa.next),
                                  lambda::print_lambda(*sb.next),
                                  sa.rule,
                                  sb.rule});
      if (!play(*sa.next, *sb.next, d - 1, w)) return false;
      path_.pop_back();
      return true;
    }
    for (std::size_t i = 0; i < probes_.size(); ++i) {
      const LamTerm a2 = lambda::subst1(*sa.next, probes_[i]);
      const LamTerm b2 = lambda::subst1(*sb.next, probes_[i]);
      path_.push_back(WitnessStep{WitnessStep::Move::Apply,
                                  {i},
                                  lambda::print_lambda(probes_[i]),
                                  lambda::print_lambda(a2),
                                  lambda::print_lambda(b2),
                                  "lam",
                                  "lam"});
      if (!play(a2, b2, d - 1, w)) return false;
      path_.pop_back();
    }
    return true;
  }

  std::vector<WitnessStep> path() const { return path_; }
  std::size_t explored() const { return explored_; }

 private:
  struct Shape {
    BKind kind;
    std::optional<LamTerm> next;  // reduct, or abstraction body
    std::string rule;
  };

  Shape shape(const LamTerm& t) const {
    if (t.is_lam()) return Shape{BKind::Fun, t.body(), "lam"};
    const LamBehavior b = lambda::step(t, style_);
    if (b.is_reduce()) return Shape{BKind::Reduce, b.reduct(), b.rule};
    return Shape{BKind::Stuck, std::nullopt, b.rule};
  }

  Style style_;
  const std::vector<LamTerm>& probes_;
  std::unordered_map<std::pair<LamTerm, LamTerm>, std::size_t, PairHash<LamTerm>> visited_;
  std::vector<WitnessStep> path_;
  std::size_t explored_ = 0;
};

std::uint64_t lambda_fingerprint(const std::vector<LamTerm>& probes) {
  std::vector<std::string> printed;
  for (const auto& p : probes) printed.push_back(lambda::print_lambda(p));
  return probe_fingerprint(printed);
}

void check_probes_closed(const std::vector<LamTerm>& probes) {
  for (const auto& p : probes) {
    if (p.stage() != 0) throw Error("probes must be closed terms");
  }
}

}  // namespace

Verdict appbisim(const LamTerm& t1, const LamTerm& t2, Style style, const LamBisimParams& p) {
  if (t1.stage() != 0 || t2.stage() != 0) throw Error("appbisim needs closed terms");
  check_probes_closed(p.probes);
  AppGame game(style, p.probes);
  Verdict v;
  v.depth = p.depth;
  v.fingerprint = lambda_fingerprint(p.probes);
  Witness w;
  w.left = lambda::print_lambda(t1);
  w.right = lambda::print_lambda(t2);
  if (!game.play(t1, t2, p.depth, w)) {
    w.path = game.path();
    v.bisimilar = false;
    v.witness = std::move(w);
  }
  v.pairs_explored = game.explored();
  return v;
}

Verdict open_ext(const LamTerm& t1, const LamTerm& t2, Style style, const LamBisimParams& p) {
  if (t1.stage() != t2.stage()) throw Error("open_ext needs terms at the same stage");
  const std::size_t n = t1.stage();
  if (n == 0) return appbisim(t1, t2, style, p);
  check_probes_closed(p.probes);
  Verdict total;
  total.depth = p.depth;
  total.fingerprint = lambda_fingerprint(p.probes);
  for (const auto& u : tuples(p.probes.size(), n, SIZE_MAX)) {
    std::vector<LamTerm> us;
    for (std::size_t i : u) us.push_back(p.probes[i]);
    Verdict v = appbisim(lambda::subst(t1, us, 0), lambda::subst(t2, us, 0), style, p);
    total.pairs_explored += v.pairs_explored;
    if (!v.bisimilar) {
      v.witness->substitution = u;
      std::string text = "[";
      for (std::size_t i = 0; i < us.size(); ++i) {
        if (i) text += ", ";
        text += lambda::print_lambda(us[i]);
      }
      v.witness->substitution_text = text + "]";
      v.witness->left = lambda::print_lambda(t1);
      v.witness->right = lambda::print_lambda(t2);
      v.pairs_explored = total.pairs_explored;
      return v;
    }
  }
  return total;
}

Verdict coalgebraic_bisim(const LamTerm& t1, const LamTerm& t2, Style style,
                          const LamBisimParams& p) {
  if (t1.stage() != t2.stage()) throw Error("terms at different stages");
  check_probes_closed(p.probes);
  LamSys sys{style, p.probes, {}};
  DetGame<LamSys> game(sys);
  return game.run(t1, t2, p.depth);
}

// ---------------------------------------------------------------------------
// Closure conditions

ClosureReport check_closure(const std::vector<std::pair<LamTerm, LamTerm>>& rel, Style style,
                            const LamBisimParams& p) {
  ClosureReport report;
  report.pairs = rel.size();
  std::mt19937_64 rng(p.seed);
  auto below = [&rng](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  for (std::size_t k = 0; k < rel.size(); ++k) {
    const auto& [t1, t2] = rel[k];
    if (t1.stage() != t2.stage()) throw Error("related terms at different stages");
    const std::size_t n = t1.stage();

    std::vector<std::vector<LamTerm>> substitutions;
    for (std::size_t s = 0; s < p.renaming_samples; ++s) {
      const std::size_t m = n == 0 ? below(3) : 1 + below(n + 1);
      std::vector<std::size_t> table(n);
      for (auto& e : table) e = below(m);
      const lambda::Renaming r(n, m, table);
      ++report.renamings_checked;
      Verdict v = open_ext(lambda::rename(t1, r), lambda::rename(t2, r), style, p);
      if (!v.bisimilar) {
        std::string text;
        for (std::size_t i = 0; i < n; ++i) text += (i ? "," : "") + std::to_string(table[i]);
        report.violations.push_back(
            {k, Clause::C1,
             "renaming " + std::to_string(n) + "->" + std::to_string(m) + " [" + text + "]",
             std::move(v)});
      }
      std::vector<LamTerm> vars;
      for (std::size_t i = 0; i < n; ++i) vars.push_back(LamTerm::var(m, table[i]));
      substitutions.push_back(std::move(vars));
    }
    for (std::size_t s = 0; s < p.subst_samples; ++s) {
      const std::size_t m = below(2);
      std::vector<LamTerm> us;
      for (std::size_t i = 0; i < n; ++i) {
        if ((m > 0 && below(2) == 0) || p.probes.empty()) {
          if (m == 0) break;
          us.push_back(LamTerm::var(m, below(m)));
        } else {
          LamTerm q = p.probes[below(p.probes.size())];
          for (std::size_t j = 0; j < m; ++j) q = lambda::up(q);
          us.push_back(q);
        }
      }
      if (us.size() == n) substitutions.push_back(std::move(us));
    }
    for (const auto& us : substitutions) {
      const std::size_t m = us.empty() ? 0 : us.front().stage();
      ++report.substitutions_checked;
      Verdict v = open_ext(lambda::subst(t1, us, m), lambda::subst(t2, us, m), style, p);
      if (!v.bisimilar) {
        std::string text = "[";
        for (std::size_t i = 0; i < us.size(); ++i) {
          text += (i ? ", " : "") + lambda::print_lambda(us[i]);
        }
        report.violations.push_back({k, Clause::C2, "substitution " + text + "]", std::move(v)});
      }
    }
    Verdict v = coalgebraic_bisim(t1, t2, style, p);
    if (!v.bisimilar) {
      report.violations.push_back({k, v.witness->clause, "behaviour game", std::move(v)});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Replay

namespace {

template <class Sys>
std::string replay_path(const Sys& sys, typename Sys::State a, typename Sys::State b,
                        const Witness& w) {
  using State = typename Sys::State;
  if (sys.print(a) != w.left || sys.print(b) != w.right) return "root pair does not match";
  for (std::size_t k = 0; k < w.path.size(); ++k) {
    const auto& st = w.path[k];
    const std::string at = "step " + std::to_string(k) + ": ";
    State a2 = a;
    State b2 = b;
    switch (st.move) {
      case WitnessStep::Move::Substitute: {
        if (st.probes.size() != sys.subst_arity(a)) return at + "substitution has the wrong length";
        for (std::size_t i : st.probes) {
          if (i >= sys.closed_probes().size()) return at + "probe index out of range";
        }
        a2 = sys.substitute(a, st.probes);
        b2 = sys.substitute(b, st.probes);
        break;
      }
      case WitnessStep::Move::Reduce: {
        const auto ba = sys.step(a);
        const auto bb = sys.step(b);
        if (sys.kind(ba) != BKind::Reduce || sys.kind(bb) != BKind::Reduce) {
          return at + "a side does not reduce";
        }
        if (sys.rule(ba) != st.left_rule || sys.rule(bb) != st.right_rule) {
          return at + "rule ids differ";
        }
        a2 = sys.reduct(ba);
        b2 = sys.reduct(bb);
        break;
      }
      case WitnessStep::Move::Apply: {
        const auto ba = sys.step(a);
        const auto bb = sys.step(b);
        if (sys.kind(ba) != BKind::Fun || sys.kind(bb) != BKind::Fun) {
          return at + "a side is not a function";
        }
        const auto& probes = sys.probes_at(a);
        if (st.probes.size() != 1 || st.probes[0] >= probes.size()) return at + "bad probe index";
        if (sys.print(probes[st.probes[0]]) != st.label) return at + "probe text differs";
        a2 = sys.apply(ba, probes[st.probes[0]]);
        b2 = sys.apply(bb, probes[st.probes[0]]);
        break;
      }
    }
    if (sys.print(a2) != st.left || sys.print(b2) != st.right) return at + "states differ";
    a = a2;
    b = b2;
  }
  const BKind ka = sys.kind(sys.step(a));
  const BKind kb = sys.kind(sys.step(b));
  if (ka == kb) return "final pair has matching behaviours";
  if (w.left_behavior != kind_name(ka) || w.right_behavior != kind_name(kb)) {
    return "final behaviours differ from the witness";
  }
  if (w.clause != left_clause(ka)) return "cited clause does not match the mismatch";
  return "";
}

// The applicative game viewed as a system: functions are abstractions.
struct AppSys {
  using State = LamTerm;
  struct Beh {
    BKind kind;
    std::optional<LamTerm> next;
    std::string rule;
  };
  Style style;
  const std::vector<LamTerm>& probes;

  Beh step(const LamTerm& t) const {
    if (t.is_lam()) return {BKind::Fun, t.body(), "lam"};
    const LamBehavior b = lambda::step(t, style);
    if (b.is_reduce()) return {BKind::Reduce, b.reduct(), b.rule};
    return {BKind::Stuck, std::nullopt, b.rule};
  }
  BKind kind(const Beh& b) const { return b.kind; }
  LamTerm reduct(const Beh& b) const { return *b.next; }
  LamTerm apply(const Beh& b, const LamTerm& e) const { return lambda::subst1(*b.next, e); }
  std::string rule(const Beh& b) const { return b.rule; }
  std::string print(const LamTerm& t) const { return lambda::print_lambda(t); }
  const std::vector<LamTerm>& probes_at(const LamTerm&) const { return probes; }
  const std::vector<LamTerm>& closed_probes() const { return probes; }
  std::size_t subst_arity(const LamTerm&) const { return 0; }
  LamTerm substitute(const LamTerm& t, const std::vector<std::size_t>&) const { return t; }
};

Clause applicative_clause(BKind left, BKind right) {
  if (left == BKind::Reduce) return Clause::A1;
  if (left == BKind::Fun) return Clause::A2;
  return right == BKind::Reduce ? Clause::A3 : Clause::A4;
}

}  // namespace

std::string replay(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p,
                   const Witness& w) {
  auto prep = prepare(engine, p);
  SkiSys sys{*prep.engine, prep.probes};
  return replay_path(sys, t1, t2, w);
}

std::string replay_nd(const Engine& engine, const Term& t1, const Term& t2, const BisimParams& p,
                      const NdRefutation& r) {
  auto prep = prepare(engine, p);
  const Engine& eng = *prep.engine;
  if (eng.print(t1) != r.left || eng.print(t2) != r.right) return "pair does not match";
  const auto left = eng.step_nd(t1).members;
  const auto right = eng.step_nd(t2).members;
  const auto& mine = r.challenger_left ? left : right;
  const auto& theirs = r.challenger_left ? right : left;
  if (r.member >= mine.size()) return "challenger index out of range";
  const DetBehavior& m = mine[r.member];
  const BKind km = m.is_reduce() ? BKind::Reduce : BKind::Fun;
  if (r.clause != (r.challenger_left ? left_clause(km) : right_clause(km))) {
    return "cited clause does not match the challenger";
  }
  if (r.answers.size() != theirs.size()) return "not every answer is refuted";
  std::vector<bool> seen(theirs.size(), false);
  for (const auto& ans : r.answers) {
    if (ans.candidate >= theirs.size() || seen[ans.candidate]) return "bad candidate index";
    seen[ans.candidate] = true;
    const DetBehavior& c = theirs[ans.candidate];
    const BKind kc = c.is_reduce() ? BKind::Reduce : BKind::Fun;
    if (!ans.reason) {
      if (kc == km) return "candidate of the same kind left unrefuted";
      continue;
    }
    if (kc != km) return "refutation given for a variant mismatch";
    const DetBehavior& lb = r.challenger_left ? m : c;
    const DetBehavior& rb = r.challenger_left ? c : m;
    std::string sub;
    if (km == BKind::Reduce) {
      sub =
          replay_nd(eng, lb.reduct(), rb.reduct(), BisimParams{p.depth, prep.probes}, *ans.reason);
    } else {
      if (!ans.probe || *ans.probe >= prep.probes.size()) return "bad probe index";
      const Term& e = prep.probes[*ans.probe];
      sub = replay_nd(eng, eng.apply(lb, e), eng.apply(rb, e), BisimParams{p.depth, prep.probes},
                      *ans.reason);
    }
    if (!sub.empty()) return sub;
  }
  return "";
}

std::string replay_appbisim(const LamTerm& t1, const LamTerm& t2, Style style,
                            const LamBisimParams& p, const Witness& w) {
  LamTerm a = t1;
  LamTerm b = t2;
  if (t1.stage() > 0 || !w.substitution.empty()) {
    if (w.substitution.size() != t1.stage()) return "substitution has the wrong length";
    std::vector<LamTerm> us;
    for (std::size_t i : w.substitution) {
      if (i >= p.probes.size()) return "substitution probe out of range";
      us.push_back(p.probes[i]);
    }
    if (lambda::print_lambda(t1) != w.left || lambda::print_lambda(t2) != w.right) {
      return "root pair does not match";
    }
    a = lambda::subst(t1, us, 0);
    b = lambda::subst(t2, us, 0);
  }
  AppSys sys{style, p.probes};
  Witness converted = w;
  converted.left = sys.print(a);
  converted.right = sys.print(b);
  // replay_path checks coalgebraic clause ids; translate the final clause.
  {
    LamTerm x = a;
    LamTerm y = b;
    for (const auto& st : w.path) {
      const auto bx = sys.step(x);
      const auto by = sys.step(y);
      if (st.move == WitnessStep::Move::Reduce) {
        if (bx.kind != BKind::Reduce || by.kind != BKind::Reduce) return "a side does not reduce";
        x = *bx.next;
        y = *by.next;
      } else if (st.move == WitnessStep::Move::Apply) {
        if (bx.kind != BKind::Fun || by.kind != BKind::Fun) return "a side is not an abstraction";
        if (st.probes.size() != 1 || st.probes[0] >= p.probes.size()) return "bad probe index";
        x = sys.apply(bx, p.probes[st.probes[0]]);
        y = sys.apply(by, p.probes[st.probes[0]]);
      } else {
        return "unexpected substitution move";
      }
    }
    const BKind kx = sys.step(x).kind;
    const BKind ky = sys.step(y).kind;
    if (kx == ky) return "final pair has matching behaviours";
    if (w.clause != applicative_clause(kx, ky)) return "cited clause does not match the mismatch";
    converted.clause = left_clause(kx);
  }
  return replay_path(sys, a, b, converted);
}

std::string replay_coalgebraic(const LamTerm& t1, const LamTerm& t2, Style style,
                               const LamBisimParams& p, const Witness& w) {
  LamSys sys{style, p.probes, {}};
  return replay_path(sys, t1, t2, w);
}

}  // namespace hogsos
