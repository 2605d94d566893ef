#include "hogsos/harness.hpp"

#include <atomic>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace hogsos {

namespace {

constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSat - b ? kSat : a + b; }
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSat / b ? kSat : a * b;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

// ---------------------------------------------------------------------------
// First-order contexts

class ContextSpace {
 public:
  ContextSpace(const Signature& sig, std::size_t max_size)
      : sig_(sig), max_(max_size), closed_count_(max_size + 1, 0), closed_(max_size + 1) {
    for (std::size_t s = 1; s <= max_size; ++s) {
      for (OpId op = 0; op < sig.size(); ++op) {
        closed_count_[s] = sat_add(closed_count_[s], tuples(sig.op(op).arity, s - 1));
      }
    }
    ctx_.assign(max_size + 1, 0);
    for (std::size_t k = 1; k <= max_size; ++k) ctx_[k] = count(k);
  }

  std::uint64_t contexts(std::size_t k) const { return k <= max_ ? ctx_[k] : 0; }

  Term unrank(std::size_t k, std::uint64_t r) {
    if (k == 1) return Term::meta(Context::kHole);
    for (OpId op = 0; op < sig_.size(); ++op) {
      const std::size_t n = sig_.op(op).arity;
      if (n == 0 || k < n + 1) continue;
      for (std::size_t hole = 0; hole < n; ++hole) {
        for (std::size_t s = 1; s + (n - 1) <= k - 1; ++s) {
          const std::size_t rest = k - 1 - s;
          const std::uint64_t w = tuples(n - 1, rest);
          const std::uint64_t block = sat_mul(ctx_[s], w);
          if (r >= block) {
            r -= block;
            continue;
          }
          Term sub = unrank(s, r / w);
          std::vector<Term> others = unrank_tuple(n - 1, rest, r % w);
          std::vector<Term> args;
          for (std::size_t i = 0, o = 0; i < n; ++i) args.push_back(i == hole ? sub : others[o++]);
          return Term::op(op, std::move(args));
        }
      }
    }
    throw Error("context rank out of range");
  }

 private:
  std::uint64_t count(std::size_t k) {
    if (k == 1) return 1;
    std::uint64_t total = 0;
    for (OpId op = 0; op < sig_.size(); ++op) {
      const std::size_t n = sig_.op(op).arity;
      if (n == 0 || k < n + 1) continue;
      for (std::size_t hole = 0; hole < n; ++hole) {
        for (std::size_t s = 1; s + (n - 1) <= k - 1; ++s) {
          total = sat_add(total, sat_mul(ctx_[s], tuples(n - 1, k - 1 - s)));
        }
      }
    }
    return total;
  }

  // Tuples of m closed terms with total size r.
  std::uint64_t tuples(std::size_t m, std::size_t r) {
    if (m == 0) return r == 0 ? 1 : 0;
    const auto key = std::make_pair(m, r);
    if (auto it = tuples_.find(key); it != tuples_.end()) return it->second;
    std::uint64_t total = 0;
    for (std::size_t a = 1; a + (m - 1) <= r; ++a) {
      total = sat_add(total, sat_mul(closed_count_[a], tuples(m - 1, r - a)));
    }
    tuples_[key] = total;
    return total;
  }

  // Materialized on first use; only small sizes are ever unranked.
  const std::vector<Term>& closed(std::size_t size) {
    auto& slot = closed_[size];
    if (!slot) slot = enumerate_closed_of_size(sig_, size);
    return *slot;
  }

  std::vector<Term> unrank_tuple(std::size_t m, std::size_t r, std::uint64_t rank) {
    if (m == 0) return {};
    for (std::size_t a = 1; a + (m - 1) <= r; ++a) {
      const std::uint64_t w = tuples(m - 1, r - a);
      const std::uint64_t block = sat_mul(closed_count_[a], w);
      if (rank >= block) {
        rank -= block;
        continue;
      }
      std::vector<Term> out{closed(a)[rank / w]};
      auto rest = unrank_tuple(m - 1, r - a, rank % w);
      out.insert(out.end(), rest.begin(), rest.end());
      return out;
    }
    throw Error("tuple rank out of range");
  }

  const Signature& sig_;
  std::size_t max_;
  std::vector<std::uint64_t> closed_count_;
  std::vector<std::optional<std::vector<Term>>> closed_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> tuples_;
  std::vector<std::uint64_t> ctx_;
};

// ---------------------------------------------------------------------------
// Lambda contexts

using lambda::LamContext;
using lambda::LamTerm;

class LamContextSpace {
 public:
  explicit LamContextSpace(std::size_t max_size) : max_(max_size) {}

  std::uint64_t contexts(std::size_t stage, std::size_t k) {
    if (k == 0) return 0;
    if (k == 1) return 1;
    const auto key = std::make_pair(stage, k);
    if (auto it = counts_.find(key); it != counts_.end()) return it->second;
    std::uint64_t total = contexts(stage + 1, k - 1);
    for (std::size_t a = 1; a + 2 <= k; ++a) {
      total = sat_add(total, sat_mul(sat_mul(2, term_count(stage, a)), contexts(stage, k - 1 - a)));
    }
    counts_[key] = total;
    return total;
  }

  void unrank(std::size_t stage, std::size_t k, std::uint64_t r,
              std::vector<LamContext::Frame>& frames) {
    if (k == 1) return;
    const std::uint64_t lam = contexts(stage + 1, k - 1);
    if (r < lam) {
      frames.push_back({LamContext::Frame::Kind::Lam, std::nullopt});
      unrank(stage + 1, k - 1, r, frames);
      return;
    }
    r -= lam;
    for (auto kind : {LamContext::Frame::Kind::AppLeft, LamContext::Frame::Kind::AppRight}) {
      for (std::size_t a = 1; a + 2 <= k; ++a) {
        const std::uint64_t w = contexts(stage, k - 1 - a);
        const std::uint64_t block = sat_mul(term_count(stage, a), w);
        if (r >= block) {
          r -= block;
          continue;
        }
        frames.push_back({kind, terms(stage, a)[r / w]});
        unrank(stage, k - 1 - a, r % w, frames);
        return;
      }
    }
    throw Error("context rank out of range");
  }

 private:
  std::uint64_t term_count(std::size_t stage, std::size_t size) {
    if (size == 0) return 0;
    if (size == 1) return stage;
    const auto key = std::make_pair(stage, size);
    if (auto it = term_counts_.find(key); it != term_counts_.end()) return it->second;
    std::uint64_t total = term_count(stage + 1, size - 1);
    for (std::size_t a = 1; a + 1 < size; ++a) {
      total = sat_add(total, sat_mul(term_count(stage, a), term_count(stage, size - 1 - a)));
    }
    term_counts_[key] = total;
    return total;
  }

  const std::vector<LamTerm>& terms(std::size_t stage, std::size_t size) {
    const auto key = std::make_pair(stage, size);
    if (auto it = terms_.find(key); it != terms_.end()) return it->second;
    return terms_.emplace(key, lambda::enumerate_lambda_of_size(stage, size)).first->second;
  }

  std::size_t max_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> counts_;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> term_counts_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<LamTerm>> terms_;
};

template <class CountFn>
std::size_t pick_size(std::size_t max_size, std::mt19937_64& rng, CountFn&& count) {
  std::vector<std::size_t> feasible;
  for (std::size_t k = 1; k <= max_size; ++k) {
    if (count(k) > 0) feasible.push_back(k);
  }
  return feasible[uniform_below(rng, feasible.size())];
}

}  // namespace

std::uint64_t count_contexts(const Signature& sig, std::size_t size) {
  if (size == 0) return 0;
  return ContextSpace(sig, size).contexts(size);
}

std::uint64_t count_lambda_contexts(std::size_t size) {
  return LamContextSpace(size).contexts(0, size);
}

Context gen_context(const Signature& sig, std::size_t max_size, std::uint64_t seed) {
  if (max_size < 1) throw Error("context size must be at least 1");
  ContextSpace space(sig, max_size);
  std::mt19937_64 rng(seed);
  const std::size_t k = pick_size(max_size, rng, [&](std::size_t s) { return space.contexts(s); });
  const std::uint64_t total = space.contexts(k);
  if (total == kSat) throw Error("too many contexts of size " + std::to_string(k));
  return Context(space.unrank(k, uniform_below(rng, total)));
}

LamContext gen_lambda_context(std::size_t max_size, std::uint64_t seed) {
  if (max_size < 1) throw Error("context size must be at least 1");
  LamContextSpace space(max_size);
  std::mt19937_64 rng(seed);
  const std::size_t k =
      pick_size(max_size, rng, [&](std::size_t s) { return space.contexts(0, s); });
  const std::uint64_t total = space.contexts(0, k);
  if (total == kSat) throw Error("too many contexts of size " + std::to_string(k));
  std::vector<LamContext::Frame> frames;
  space.unrank(0, k, uniform_below(rng, total), frames);
  return LamContext(std::move(frames));
}

// ---------------------------------------------------------------------------

bool CongruenceReport::ok() const {
  for (const auto& p : pairs) {
    if (!p.accepted) return false;
  }
  return counterexamples.empty();
}

namespace {

std::string report_header(const CongruenceParams& p) {
  return "Congruence check by bounded bisimilarity: depth " + std::to_string(p.depth) +
         ", probes of size <= " + std::to_string(p.probe_size) +
         (p.opaque_probe ? " plus the opaque probe" : "") + ", " + std::to_string(p.n_contexts) +
         " contexts of size <= " + std::to_string(p.max_context_size) + ", seed " +
         std::to_string(p.seed) +
         ". Bounded bisimilarity stands in for behavioural equivalence; they agree only in "
         "the limit of unbounded depth and probes, so an empty result is evidence, not proof. "
         "Refutations are definitive: a counterexample means either an implementation bug or "
         "a pair that is related only up to the pre-verification bound (an insufficient "
         "bound).";
}

// Index of the first context with the same text; repeated draws are checked once.
std::vector<std::size_t> first_occurrence(const std::vector<std::string>& contexts) {
  std::map<std::string, std::size_t> seen;
  std::vector<std::size_t> canon;
  for (std::size_t j = 0; j < contexts.size(); ++j) {
    canon.push_back(seen.emplace(contexts[j], j).first->second);
  }
  return canon;
}

void share_repeats(std::vector<std::optional<Verdict>>& results,
                   const std::vector<std::size_t>& canon) {
  const std::size_t nc = canon.size();
  for (std::size_t task = 0; task < results.size(); ++task) {
    const std::size_t j = task % nc;
    if (canon[j] != j) results[task] = results[task - j + canon[j]];
  }
}

template <class Fn>
void run_tasks(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CongruenceReport congruence_test(const InstanceBundle& instance,
                                 const std::vector<std::pair<std::string, std::string>>& pairs,
                                 const CongruenceParams& params) {
  CongruenceReport report;
  report.instance = instance.id;
  report.params = params;
  report.header = report_header(params);

  const std::size_t nc = params.n_contexts;
  std::vector<std::optional<Verdict>> results;

  if (instance.kind == InstanceBundle::Kind::FirstOrder) {
    const Engine& eng = *instance.engine;
    const Signature& sig = eng.sig();
    BisimParams bp;
    bp.depth = params.depth;
    bp.probes = default_probes(sig, params.probe_size);
    bp.opaque_probe = params.opaque_probe;
    auto equiv = [&](const Term& a, const Term& b) {
      return eng.deterministic() ? bisim_det(eng, a, b, bp) : bisim_nd(eng, a, b, bp);
    };
    std::vector<std::pair<Term, Term>> terms;
    for (const auto& [l, r] : pairs) {
      terms.emplace_back(parse_term(l, sig), parse_term(r, sig));
      PairOutcome out;
      out.left = l;
      out.right = r;
      out.pre = equiv(terms.back().first, terms.back().second);
      out.accepted = out.pre.bisimilar;
      report.pairs.push_back(std::move(out));
    }
    std::vector<Context> contexts;
    for (std::size_t j = 0; j < nc; ++j) {
      contexts.push_back(gen_context(sig, params.max_context_size, splitmix64(params.seed + j)));
      report.contexts.push_back(print_context(contexts.back(), sig));
    }
    const auto canon = first_occurrence(report.contexts);
    results.resize(pairs.size() * nc);
    run_tasks(results.size(), params.threads, [&](std::size_t task) {
      const std::size_t i = task / nc;
      const std::size_t j = task % nc;
      if (!report.pairs[i].accepted || canon[j] != j) return;
      results[task] = equiv(plug(contexts[j], terms[i].first), plug(contexts[j], terms[i].second));
    });
    share_repeats(results, canon);
    for (std::size_t task = 0; task < results.size(); ++task) {
      if (!results[task]) continue;
      const std::size_t i = task / nc;
      const std::size_t j = task % nc;
      ++report.pairs[i].contexts_tested;
      if (!results[task]->bisimilar) {
        report.counterexamples.push_back(
            {i, j, report.contexts[j], eng.print(plug(contexts[j], terms[i].first)),
             eng.print(plug(contexts[j], terms[i].second)), std::move(*results[task])});
      }
    }
    return report;
  }

  const lambda::Style style = instance.style.value();
  LamBisimParams lp;
  lp.depth = params.depth;
  lp.probes = default_lambda_probes(params.probe_size);
  std::vector<std::pair<LamTerm, LamTerm>> terms;
  for (const auto& [l, r] : pairs) {
    terms.emplace_back(lambda::parse_lambda(l), lambda::parse_lambda(r));
    PairOutcome out;
    out.left = l;
    out.right = r;
    out.pre = appbisim(terms.back().first, terms.back().second, style, lp);
    out.accepted = out.pre.bisimilar;
    report.pairs.push_back(std::move(out));
  }
  std::vector<LamContext> contexts;
  for (std::size_t j = 0; j < nc; ++j) {
    contexts.push_back(gen_lambda_context(params.max_context_size, splitmix64(params.seed + j)));
    report.contexts.push_back(lambda::print_lambda_context(contexts.back()));
  }
  const auto canon = first_occurrence(report.contexts);
  results.resize(pairs.size() * nc);
  run_tasks(results.size(), params.threads, [&](std::size_t task) {
    const std::size_t i = task / nc;
    const std::size_t j = task % nc;
    if (!report.pairs[i].accepted || canon[j] != j) return;
    results[task] = appbisim(lambda::plug(contexts[j], terms[i].first),
                             lambda::plug(contexts[j], terms[i].second), style, lp);
  });
  share_repeats(results, canon);
  for (std::size_t task = 0; task < results.size(); ++task) {
    if (!results[task]) continue;
    const std::size_t i = task / nc;
    const std::size_t j = task % nc;
    ++report.pairs[i].contexts_tested;
    if (!results[task]->bisimilar) {
      report.counterexamples.push_back(
          {i, j, report.contexts[j],
           lambda::print_lambda(lambda::plug(contexts[j], terms[i].first)),
           lambda::print_lambda(lambda::plug(contexts[j], terms[i].second)),
           std::move(*results[task])});
    }
  }
  return report;
}

}  // namespace hogsos
