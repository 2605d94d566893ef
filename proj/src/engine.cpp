#include "hogsos/engine.hpp"

#include <algorithm>

namespace hogsos {

DetBehavior DetBehavior::reduce(Term t, std::size_t rule) {
  DetBehavior b;
  b.kind_ = Kind::Reduce;
  b.rule_ = rule;
  b.reduct_ = std::move(t);
  return b;
}

DetBehavior DetBehavior::fun(std::size_t rule, std::vector<Term> args,
                             std::vector<DetBehavior> arg_behaviors) {
  DetBehavior b;
  b.kind_ = Kind::Fun;
  b.rule_ = rule;
  b.fun_ = std::make_shared<const FunData>(FunData{std::move(args), std::move(arg_behaviors)});
  return b;
}

const Term& DetBehavior::reduct() const {
  if (!is_reduce()) throw Error("behaviour is not a reduction");
  return *reduct_;
}

bool operator==(const DetBehavior& a, const DetBehavior& b) { return (a <=> b) == 0; }

std::strong_ordering operator<=>(const DetBehavior& a, const DetBehavior& b) {
  if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
  if (a.is_reduce()) return *a.reduct_ <=> *b.reduct_;
  if (auto c = a.rule_ <=> b.rule_; c != 0) return c;
  if (a.fun_ == b.fun_) return std::strong_ordering::equal;
  if (auto c = std::lexicographical_compare_three_way(a.fun_->args.begin(), a.fun_->args.end(),
                                                      b.fun_->args.begin(), b.fun_->args.end());
      c != 0) {
    return c;
  }
  return std::lexicographical_compare_three_way(
      a.fun_->arg_behaviors.begin(), a.fun_->arg_behaviors.end(), b.fun_->arg_behaviors.begin(),
      b.fun_->arg_behaviors.end());
}

bool NondetBehavior::contains(const DetBehavior& b) const {
  return std::binary_search(members.begin(), members.end(), b);
}

Engine::Engine(std::shared_ptr<const HOSpec> spec, std::size_t cache_capacity)
    : spec_(std::move(spec)), capacity_(cache_capacity) {
  if (!spec_) throw Error("engine needs a spec");
}

DetBehavior Engine::step(const Term& t) const {
  if (!deterministic()) throw Error("step needs a deterministic spec; use step_nd");
  auto m = behaviours(t);
  if (m->size() != 1) throw Error("spec is not deterministic at " + print(t));
  return m->front();
}

NondetBehavior Engine::step_nd(const Term& t) const { return NondetBehavior{*behaviours(t)}; }

Engine::Members Engine::behaviours(const Term& t) const {
  if (capacity_ == 0) return compute(t);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.index.find(t); it != cache_.index.end()) {
      cache_.order.splice(cache_.order.begin(), cache_.order, it->second);
      return it->second->second;
    }
  }
  Members m = compute(t);
  std::lock_guard lock(mutex_);
  if (cache_.index.find(t) == cache_.index.end()) {
    cache_.order.emplace_front(t, m);
    cache_.index.emplace(t, cache_.order.begin());
    if (cache_.order.size() > capacity_) {
      cache_.index.erase(cache_.order.back().first);
      cache_.order.pop_back();
    }
  }
  return m;
}

Engine::Members Engine::compute(const Term& t) const {
  if (!t.is_op()) throw Error("cannot step an open term");
  const auto& sig = this->sig();
  if (t.head() >= sig.size() || sig.op(t.head()).arity != t.args().size()) {
    throw Error("term does not belong to the spec's signature");
  }
  const std::size_t n = t.args().size();
  std::vector<Members> sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    sets[i] = behaviours(t.arg(i));
    if (sets[i]->empty()) return sets[i];  // no behaviour at all: propagate emptiness
  }
  const std::vector<Term> args(t.args().begin(), t.args().end());
  std::vector<DetBehavior> out;
  std::vector<std::size_t> choice(n, 0);
  std::vector<const DetBehavior*> chosen(n);
  for (;;) {
    PremiseShape shape = 0;
    for (std::size_t i = 0; i < n; ++i) {
      chosen[i] = &(*sets[i])[choice[i]];
      if (chosen[i]->is_reduce()) shape |= PremiseShape{1} << i;
    }
    for (std::size_t idx : spec_->rules_for(t.head(), shape)) {
      const auto& rule = spec_->rule(idx);
      if (rule.kind == RuleKind::Unlabelled) {
        out.push_back(
            DetBehavior::reduce(instantiate(rule.conclusion, args, chosen, nullptr), idx));
      } else {
        std::vector<DetBehavior> beh;
        beh.reserve(n);
        for (const auto* b : chosen) beh.push_back(*b);
        out.push_back(DetBehavior::fun(idx, args, std::move(beh)));
      }
    }
    std::size_t i = 0;
    while (i < n && ++choice[i] == sets[i]->size()) choice[i++] = 0;
    if (i == n) break;
  }
  // Equal reducts from different rules collapse onto the lowest rule index.
  std::sort(out.begin(), out.end(), [](const DetBehavior& a, const DetBehavior& b) {
    if (auto c = a <=> b; c != 0) return c < 0;
    return a.rule() < b.rule();
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return std::make_shared<const std::vector<DetBehavior>>(std::move(out));
}

Term Engine::instantiate(const Term& c, const std::vector<Term>& args,
                         const std::vector<const DetBehavior*>& beh, const Term* label) const {
  if (c.is_op()) {
    std::vector<Term> sub;
    sub.reserve(c.args().size());
    for (const auto& a : c.args()) sub.push_back(instantiate(a, args, beh, label));
    return Term::op(c.head(), std::move(sub));
  }
  const MetaVar v = MetaVar::decode(c.meta_id());
  switch (v.kind) {
    case MetaVar::Kind::Label:
      return *label;
    case MetaVar::Kind::Arg:
      return args.at(v.index - 1);
    case MetaVar::Kind::Reduct:
      return beh.at(v.index - 1)->reduct();
    case MetaVar::Kind::FunApp:
      return apply(*beh.at(v.index - 1), v.at == 0 ? *label : args.at(v.at - 1));
  }
  throw Error("corrupt metavariable");
}

Term Engine::apply(const DetBehavior& b, const Term& e) const {
  if (!b.is_fun()) throw Error("cannot apply a reduction");
  if (!e.closed()) throw Error("label must be a closed term");
  std::vector<const DetBehavior*> beh;
  beh.reserve(b.arg_behaviors().size());
  for (const auto& a : b.arg_behaviors()) beh.push_back(&a);
  return instantiate(spec_->rule(b.rule()).conclusion, b.args(), beh, &e);
}

Trace Engine::trace(const Term& t, std::size_t max_steps) const {
  Trace tr;
  tr.terms.push_back(t);
  for (std::size_t steps = 0;; ++steps) {
    const DetBehavior b =
        deterministic() ? step(tr.terms.back()) : step_nd(tr.terms.back()).members.front();
    if (b.is_fun()) {
      tr.terminal = Trace::Terminal::Fun;
      return tr;
    }
    if (steps == max_steps) {
      tr.terminal = Trace::Terminal::Budget;
      return tr;
    }
    tr.terms.push_back(b.reduct());
  }
}

std::string Engine::print(const DetBehavior& b) const {
  if (b.is_reduce()) return "reduce " + print(b.reduct()) + " [" + rule_name(b) + "]";
  std::string out = "fun [" + rule_name(b) + "] on (";
  for (std::size_t i = 0; i < b.args().size(); ++i) {
    if (i) out += ", ";
    out += print(b.args()[i]);
  }
  return out + ")";
}

std::size_t Engine::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.order.size();
}

void Engine::clear_cache() const {
  std::lock_guard lock(mutex_);
  cache_.order.clear();
  cache_.index.clear();
}

std::string print_trace(const Trace& tr, const Signature& sig) {
  std::string out;
  for (std::size_t i = 0; i < tr.terms.size(); ++i) {
    if (i) out += " -> ";
    out += print_term(tr.terms[i], sig);
  }
  out += tr.terminal == Trace::Terminal::Fun ? " [fun]" : " [budget]";
  return out;
}

}  // namespace hogsos
