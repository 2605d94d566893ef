#include "hogsos/law_lab.hpp"

#include <algorithm>

namespace hogsos {

Law spec_law(std::shared_ptr<const HOSpec> spec) {
  return [spec](std::size_t nx, std::size_t ny, const LawInput& w) {
    return instantiate_law(*spec, nx, ny, w);
  };
}

Law label_inspecting_mutant(std::shared_ptr<const HOSpec> spec) {
  const auto app = spec->sig().infix_op();
  if (!app) throw Error("mutant needs an infix application symbol");
  return [spec, op = *app](std::size_t nx, std::size_t ny, const LawInput& w) {
    if (w.op == op && w.args.size() == 2 && !w.args[0].second.is_reduce()) {
      const std::size_t u2 = w.args[1].first;
      if (u2 == 0) {
        return std::vector<LawValue>{LawValue{Term::meta(gen::y(w.args[0].second.table().at(u2)))}};
      }
      return std::vector<LawValue>{LawValue{Term::meta(gen::x(u2))}};
    }
    return instantiate_law(*spec, nx, ny, w);
  };
}

namespace {

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) {
    r *= b;
    if (r > (std::size_t{1} << 40)) return r;
  }
  return r;
}

// All function tables from a set of size n into a set of size m.
std::vector<std::vector<std::size_t>> tables(std::size_t n, std::size_t m) {
  std::vector<std::vector<std::size_t>> out;
  if (m == 0 && n > 0) return out;
  std::vector<std::size_t> cur(n, 0);
  for (;;) {
    out.push_back(cur);
    std::size_t i = 0;
    while (i < n && ++cur[i] == m) cur[i++] = 0;
    if (i == n) return out;
  }
}

// Every (u, v) with u < nx and v in Y + Y^{nfun}.
std::vector<std::pair<std::size_t, FiniteBehavior>> arg_choices(std::size_t nx, std::size_t nfun,
                                                                std::size_t ny) {
  std::vector<std::pair<std::size_t, FiniteBehavior>> out;
  for (std::size_t u = 0; u < nx; ++u) {
    for (std::size_t y = 0; y < ny; ++y) out.push_back({u, FiniteBehavior::reduce(y)});
    for (auto& t : tables(nfun, ny)) out.push_back({u, FiniteBehavior::fun(std::move(t))});
  }
  return out;
}

template <class F>
void for_each_input(const Signature& sig, std::size_t nx, std::size_t nfun, std::size_t ny, F&& f) {
  const auto choices = arg_choices(nx, nfun, ny);
  for (OpId op = 0; op < sig.size(); ++op) {
    const std::size_t n = sig.op(op).arity;
    if (n > 0 && choices.empty()) continue;
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
      LawInput w{op, {}};
      for (std::size_t i = 0; i < n; ++i) w.args.push_back(choices[idx[i]]);
      f(w);
      std::size_t i = n;
      while (i > 0 && ++idx[i - 1] == choices.size()) idx[--i] = 0;
      if (i == 0) break;
    }
  }
}

Term map_gens(const Term& t, const std::vector<std::size_t>* fx,
              const std::vector<std::size_t>* gy) {
  if (t.is_meta()) {
    const MetaId id = t.meta_id();
    const std::size_t k = gen::index(id);
    if (gen::is_x(id)) return fx ? Term::meta(gen::x(fx->at(k))) : t;
    return gy ? Term::meta(gen::y(gy->at(k))) : t;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const auto& a : t.args()) args.push_back(map_gens(a, fx, gy));
  return Term::op(t.head(), std::move(args));
}

LawValue map_value(const LawValue& v, const std::vector<std::size_t>* fx,
                   const std::vector<std::size_t>* gy) {
  if (v.is_reduce()) return LawValue{map_gens(v.reduct(), fx, gy)};
  std::vector<Term> out;
  for (const auto& t : v.table()) out.push_back(map_gens(t, fx, gy));
  return LawValue{std::move(out)};
}

// B(f, id) on the result: precompose the table with f.
LawValue precompose(const LawValue& v, const std::vector<std::size_t>& f) {
  if (v.is_reduce()) return v;
  std::vector<Term> out;
  for (std::size_t u = 0; u < f.size(); ++u) out.push_back(v.table().at(f[u]));
  return LawValue{std::move(out)};
}

bool value_less(const LawValue& a, const LawValue& b) {
  if (a.is_reduce() != b.is_reduce()) return a.is_reduce();
  if (a.is_reduce()) return a.reduct() < b.reduct();
  return std::lexicographical_compare(a.table().begin(), a.table().end(), b.table().begin(),
                                      b.table().end());
}

std::vector<LawValue> canonical(std::vector<LawValue> vs) {
  std::sort(vs.begin(), vs.end(), value_less);
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

std::string print_values(const std::vector<LawValue>& vs, const Signature& sig) {
  if (vs.size() == 1) return print_law_value(vs.front(), sig);
  std::string out = "{";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += "; ";
    out += print_law_value(vs[i], sig);
  }
  return out + "}";
}

void check_sizes(const Signature& sig, const FiniteInstance& inst) {
  if (std::max({inst.nx, inst.nx2, inst.ny, inst.ny2}) > kLawSetLimit) {
    throw Error("law check budget: sets are limited to " + std::to_string(kLawSetLimit) +
                " elements");
  }
  for (const auto& op : sig.ops()) {
    if (op.arity > kLawArityLimit) {
      throw Error("law check budget: operator arity is limited to " +
                  std::to_string(kLawArityLimit));
    }
  }
}

constexpr std::size_t kKeptCounterexamples = 5;

void record(LawReport& r, const FiniteInstance& inst, const Signature& sig, const LawInput& w,
            const std::vector<LawValue>& a, const std::vector<LawValue>& b) {
  ++r.checks;
  if (a == b) return;
  ++r.failures;
  if (r.counterexamples.size() < kKeptCounterexamples) {
    r.counterexamples.push_back(
        {inst, print_law_input(w, sig), print_values(a, sig), print_values(b, sig)});
  }
}

void merge(LawReport& into, LawReport&& r) {
  into.instances += r.instances;
  into.checks += r.checks;
  into.failures += r.failures;
  for (auto& c : r.counterexamples) {
    if (into.counterexamples.size() < kKeptCounterexamples)
      into.counterexamples.push_back(std::move(c));
  }
}

}  // namespace

std::size_t count_law_inputs(const Signature& sig, std::size_t nx, std::size_t nfun,
                             std::size_t ny) {
  const std::size_t per_arg = nx * (ny + ipow(ny, nfun));
  std::size_t total = 0;
  for (const auto& op : sig.ops()) total += ipow(per_arg, op.arity);
  return total;
}

LawReport check_dinaturality(const Signature& sig, const Law& law, const FiniteInstance& inst) {
  check_sizes(sig, inst);
  if (inst.f.size() != inst.nx ||
      std::any_of(inst.f.begin(), inst.f.end(), [&](std::size_t v) { return v >= inst.nx2; })) {
    throw Error("f is not a function table X -> X'");
  }
  if (count_law_inputs(sig, inst.nx, inst.nx2, inst.ny) > kLawCheckBudget) {
    throw Error("law check budget exceeded");
  }
  LawReport r;
  r.instances = 1;
  for_each_input(sig, inst.nx, inst.nx2, inst.ny, [&](const LawInput& w) {
    // Leg through X: precompose the argument tables with f, apply rho_X, then
    // rename X-generators along f.
    LawInput wx{w.op, {}};
    for (const auto& [u, v] : w.args) {
      if (v.is_reduce()) {
        wx.args.push_back({u, v});
      } else {
        std::vector<std::size_t> t(inst.nx);
        for (std::size_t k = 0; k < inst.nx; ++k) t[k] = v.table()[inst.f[k]];
        wx.args.push_back({u, FiniteBehavior::fun(std::move(t))});
      }
    }
    std::vector<LawValue> leg1;
    for (const auto& val : law(inst.nx, inst.ny, wx))
      leg1.push_back(map_value(val, &inst.f, nullptr));

    // Leg through X': rename states along f, apply rho_X', precompose the
    // resulting table with f.
    LawInput wx2{w.op, {}};
    for (const auto& [u, v] : w.args) wx2.args.push_back({inst.f[u], v});
    std::vector<LawValue> leg2;
    for (const auto& val : law(inst.nx2, inst.ny, wx2)) leg2.push_back(precompose(val, inst.f));

    record(r, inst, sig, w, canonical(std::move(leg1)), canonical(std::move(leg2)));
  });
  return r;
}

LawReport check_naturality_y(const Signature& sig, const Law& law, const FiniteInstance& inst) {
  check_sizes(sig, inst);
  if (inst.g.size() != inst.ny ||
      std::any_of(inst.g.begin(), inst.g.end(), [&](std::size_t v) { return v >= inst.ny2; })) {
    throw Error("g is not a function table Y -> Y'");
  }
  if (count_law_inputs(sig, inst.nx, inst.nx, inst.ny) > kLawCheckBudget) {
    throw Error("law check budget exceeded");
  }
  LawReport r;
  r.instances = 1;
  for_each_input(sig, inst.nx, inst.nx, inst.ny, [&](const LawInput& w) {
    std::vector<LawValue> leg1;
    for (const auto& val : law(inst.nx, inst.ny, w))
      leg1.push_back(map_value(val, nullptr, &inst.g));

    LawInput wg{w.op, {}};
    for (const auto& [u, v] : w.args) {
      if (v.is_reduce()) {
        wg.args.push_back({u, FiniteBehavior::reduce(inst.g[v.reduct()])});
      } else {
        std::vector<std::size_t> t;
        for (std::size_t y : v.table()) t.push_back(inst.g[y]);
        wg.args.push_back({u, FiniteBehavior::fun(std::move(t))});
      }
    }
    std::vector<LawValue> leg2 = law(inst.nx, inst.ny2, wg);

    record(r, inst, sig, w, canonical(std::move(leg1)), canonical(std::move(leg2)));
  });
  return r;
}

LawReport sweep_dinaturality(const Signature& sig, const Law& law, std::size_t max_set) {
  if (max_set > kLawSetLimit) throw Error("law check budget: --max-set is at most 3");
  std::size_t planned = 0;
  for (std::size_t nx = 0; nx <= max_set; ++nx) {
    for (std::size_t nx2 = 0; nx2 <= max_set; ++nx2) {
      for (std::size_t ny = 0; ny <= max_set; ++ny) {
        planned += ipow(nx2, nx) * count_law_inputs(sig, nx, nx2, ny);
      }
    }
  }
  if (planned > kLawCheckBudget) {
    throw Error("law check budget exceeded: " + std::to_string(planned) + " checks planned");
  }
  LawReport total;
  for (std::size_t nx = 0; nx <= max_set; ++nx) {
    for (std::size_t nx2 = 0; nx2 <= max_set; ++nx2) {
      for (std::size_t ny = 0; ny <= max_set; ++ny) {
        for (auto& f : tables(nx, nx2)) {
          FiniteInstance inst{nx, nx2, ny, ny, std::move(f), {}};
          inst.g.resize(ny);
          for (std::size_t y = 0; y < ny; ++y) inst.g[y] = y;
          merge(total, check_dinaturality(sig, law, inst));
        }
      }
    }
  }
  return total;
}

LawReport sweep_naturality_y(const Signature& sig, const Law& law, std::size_t max_set) {
  if (max_set > kLawSetLimit) throw Error("law check budget: --max-set is at most 3");
  std::size_t planned = 0;
  for (std::size_t nx = 0; nx <= max_set; ++nx) {
    for (std::size_t ny = 0; ny <= max_set; ++ny) {
      for (std::size_t ny2 = 0; ny2 <= max_set; ++ny2) {
        planned += ipow(ny2, ny) * count_law_inputs(sig, nx, nx, ny);
      }
    }
  }
  if (planned > kLawCheckBudget) {
    throw Error("law check budget exceeded: " + std::to_string(planned) + " checks planned");
  }
  LawReport total;
  for (std::size_t nx = 0; nx <= max_set; ++nx) {
    for (std::size_t ny = 0; ny <= max_set; ++ny) {
      for (std::size_t ny2 = 0; ny2 <= max_set; ++ny2) {
        for (auto& g : tables(ny, ny2)) {
          FiniteInstance inst{nx, nx, ny, ny2, {}, std::move(g)};
          inst.f.resize(nx);
          for (std::size_t x = 0; x < nx; ++x) inst.f[x] = x;
          merge(total, check_naturality_y(sig, law, inst));
        }
      }
    }
  }
  return total;
}

}  // namespace hogsos
