#include <doctest.h>

#include "hogsos/bisim.hpp"
#include "support.hpp"

using namespace hogsos;
using lambda::LamTerm;
using lambda::Style;
using testing::ski;
using testing::ski_term;

namespace {

BisimParams ski_params(std::size_t depth = 8, std::size_t probe_size = 3) {
  BisimParams p;
  p.depth = depth;
  p.probes = default_probes(ski().sig(), probe_size);
  return p;
}

LamBisimParams lam_params(std::size_t depth = 8, std::size_t probe_size = 3) {
  LamBisimParams p;
  p.depth = depth;
  p.probes = default_lambda_probes(probe_size);
  return p;
}

LamTerm L(const char* s, std::size_t stage = 0) { return lambda::parse_lambda(s, stage); }

// Plain bounded game without memoization or shortcuts.
bool naive(const Engine& e, const Term& a, const Term& b, std::size_t d,
           const std::vector<Term>& probes) {
  const auto ba = e.step(a);
  const auto bb = e.step(b);
  if (ba.is_reduce() != bb.is_reduce()) return false;
  if (d == 0) return true;
  if (ba.is_reduce()) return naive(e, ba.reduct(), bb.reduct(), d - 1, probes);
  for (const auto& p : probes) {
    if (!naive(e, e.apply(ba, p), e.apply(bb, p), d - 1, probes)) return false;
  }
  return true;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TEST_CASE("probe sets") {
  CHECK(default_probes(ski().sig(), 3).size() == 39);
  CHECK(default_probes(ski().sig(), 1).size() == 3);
  CHECK(default_lambda_probes(4).size() == 7);
  CHECK(probe_fingerprint({"S", "K"}) == fnv1a("S\nK\n"));
  CHECK(probe_fingerprint({}) == fnv1a(""));
}

TEST_CASE("the identity pair is bisimilar up to depth 8") {
  const auto p = ski_params();
  const Verdict v = bisim_det(ski(), ski_term("(S K) I"), ski_term("(S K) K"), p);
  CHECK(v.bisimilar);
  CHECK(v.depth == 8);
  CHECK(!v.witness);
  std::vector<std::string> printed;
  for (const auto& t : p.probes) printed.push_back(ski().print(t));
  CHECK(v.fingerprint == fnv1a([&] {
          std::string s;
          for (const auto& x : printed) s += x + "\n";
          return s;
        }()));
}

TEST_CASE("K and I are told apart by a replayable witness") {
  const auto p = ski_params();
  const Term k = ski_term("K"), i = ski_term("I");
  const Verdict v = bisim_det(ski(), k, i, p);
  REQUIRE(!v.bisimilar);
  REQUIRE(v.witness);
  CHECK(replay(ski(), k, i, p, *v.witness).empty());
  // Played by hand: S is the first probe, and after four applications the
  // left side is S''(S,S), a function, while the right side (S S) (S S)
  // reduces.
  const Witness& w = *v.witness;
  REQUIRE(w.path.size() == 4);
  for (const auto& s : w.path) CHECK(s.move == WitnessStep::Move::Apply);
  CHECK(w.path[0].left == "K'(S)");
  CHECK(w.path[0].right == "S");
  CHECK(w.path[3].left == "S''(S,S)");
  CHECK(w.path[3].right == "(S S) (S S)");
  CHECK(w.clause == Clause::C4);
  CHECK(clause_id(w.clause) == "4");
  CHECK(w.left_behavior == "fun");
  CHECK(w.right_behavior == "reduce");

  Witness forged = w;
  forged.path[1].right = "K";
  CHECK(!replay(ski(), k, i, p, forged).empty());
  forged = w;
  forged.clause = Clause::C3;
  CHECK(!replay(ski(), k, i, p, forged).empty());
}

TEST_CASE("memoized game agrees with the plain game") {
  const Engine& e = ski();
  const auto terms = enumerate_closed(e.sig(), 3);
  const auto probes = default_probes(e.sig(), 2);
  BisimParams p;
  p.depth = 4;
  p.probes = probes;
  std::size_t refuted = 0;
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = a; b < terms.size(); ++b) {
      const Verdict v = bisim_det(e, terms[a], terms[b], p);
      CHECK(v.bisimilar == naive(e, terms[a], terms[b], 4, probes));
      if (!v.bisimilar) {
        ++refuted;
        CHECK(replay(e, terms[a], terms[b], p, *v.witness).empty());
      }
      const Verdict sym = bisim_det(e, terms[b], terms[a], p);
      CHECK(sym.bisimilar == v.bisimilar);
    }
  }
  CHECK(refuted > 0);
}

TEST_CASE("bundle pairs") {
  const auto& b = builtin("skiu");
  const auto p = ski_params(b.depth, b.probe_size);
  for (const auto& k : b.equivalent) {
    CAPTURE(k.left);
    CHECK(bisim_det(ski(), ski_term(k.left), ski_term(k.right), p).bisimilar);
  }
  for (const auto& k : b.inequivalent) {
    CAPTURE(k.left);
    const Verdict v = bisim_det(ski(), ski_term(k.left), ski_term(k.right), p);
    REQUIRE(!v.bisimilar);
    CHECK(replay(ski(), ski_term(k.left), ski_term(k.right), p, *v.witness).empty());
  }
}

TEST_CASE("divergent terms and reflexivity") {
  const auto p = ski_params();
  const Term omega = ski_term("(S I I) (S I I)");
  CHECK(bisim_det(ski(), omega, omega, p).bisimilar);
  CHECK(bisim_det(ski(), omega, ski_term("I ((S I I) (S I I))"), p).bisimilar);
  CHECK(!bisim_det(ski(), omega, ski_term("I I"), p).bisimilar);
}

TEST_CASE("opaque probe") {
  auto p = ski_params();
  p.opaque_probe = true;
  const Verdict v = bisim_det(ski(), ski_term("(S K) I"), ski_term("(S K) K"), p);
  CHECK(v.bisimilar);
  CHECK(v.fingerprint != bisim_det(ski(), ski_term("K"), ski_term("K"), ski_params()).fingerprint);
  const auto ext = with_opaque_probe(*builtin("skiu").spec);
  const auto bot = ext->sig().find(std::string(kOpaqueProbe));
  REQUIRE(bot.has_value());
  const Engine e(ext);
  const auto beh = e.step(Term::op(*bot));
  REQUIRE(beh.is_reduce());
  CHECK(beh.reduct() == Term::op(*bot));
  const Verdict w = bisim_det(ski(), ski_term("K"), ski_term("I"), p);
  REQUIRE(!w.bisimilar);
  CHECK(replay(ski(), ski_term("K"), ski_term("I"), p, *w.witness).empty());
}

TEST_CASE("nondeterministic bisimilarity") {
  const Engine& e = testing::ski_nd();
  const auto& sig = e.sig();
  BisimParams p;
  p.depth = 8;
  p.probes = default_probes(sig, 2);
  auto T = [&](const std::string& s) { return parse_term(s, sig); };
  const std::string om = "(S I I) (S I I)";
  CHECK(bisim_nd(e, T("⊕(" + om + "," + om + ")"), T(om), p).bisimilar);
  CHECK(bisim_nd(e, T("⊕(K,I)"), T("⊕(I,K)"), p).bisimilar);
  CHECK(bisim_nd(e, T("⊕(S K,K'(I))"), T("⊕(K'(I),S K)"), p).bisimilar);
  // p + p and p differ by one step whenever p is not divergent.
  CHECK(!bisim_nd(e, T("⊕(K,K)"), T("K"), p).bisimilar);

  const Term l = T("⊕(K,I)"), r = T("K");
  const Verdict v = bisim_nd(e, l, r, p);
  REQUIRE(!v.bisimilar);
  REQUIRE(v.refutation);
  CHECK(replay_nd(e, l, r, p, *v.refutation).empty());

  const Term l2 = T("⊕(⊕(K,I),K)"), r2 = T("⊕(K,K)");
  const Verdict v2 = bisim_nd(e, l2, r2, p);
  REQUIRE(!v2.bisimilar);
  CHECK(replay_nd(e, l2, r2, p, *v2.refutation).empty());
}

TEST_CASE("nondeterministic game on deterministic terms matches the deterministic game") {
  const Engine& nd = testing::ski_nd();
  const Engine& det = ski();
  BisimParams pd, pn;
  pd.depth = pn.depth = 4;
  for (const auto& t : enumerate_closed(det.sig(), 2)) {
    pd.probes.push_back(t);
    pn.probes.push_back(parse_term(det.print(t), nd.sig()));
  }
  std::mt19937_64 rng(testing::kSeed);
  for (int i = 0; i < 150; ++i) {
    const Term a = testing::random_term(det.sig(), rng, 6);
    const Term b = testing::random_term(det.sig(), rng, 6);
    const bool want = bisim_det(det, a, b, pd).bisimilar;
    CHECK(bisim_nd(nd, parse_term(det.print(a), nd.sig()), parse_term(det.print(b), nd.sig()), pn)
              .bisimilar == want);
  }
}

TEST_CASE("applicative bisimilarity") {
  const auto p = lam_params();
  CHECK(appbisim(L("\\.0"), L("\\.0"), Style::CBN, p).bisimilar);
  CHECK(appbisim(lambda::omega(), lambda::omega(), Style::CBN, p).bisimilar);

  Verdict v = appbisim(L("(\\.0) (\\.0)"), L("\\.0"), Style::CBN, p);
  REQUIRE(!v.bisimilar);
  CHECK(v.witness->clause == Clause::A1);
  CHECK(v.witness->path.empty());

  v = appbisim(L("\\.0"), L("(\\.0) (\\.0)"), Style::CBN, p);
  REQUIRE(!v.bisimilar);
  CHECK(clause_id(v.witness->clause) == "A2");
  CHECK(replay_appbisim(L("\\.0"), L("(\\.0) (\\.0)"), Style::CBN, p, *v.witness).empty());

  // Abstractions alone cannot separate the two projections; the self
  // application probe \.0 0 can.
  CHECK(appbisim(L("\\.\\.1"), L("\\.\\.0"), Style::CBN, lam_params(8, 3)).bisimilar);
  const auto p4 = lam_params(8, 4);
  v = appbisim(L("\\.\\.1"), L("\\.\\.0"), Style::CBN, p4);
  REQUIRE(!v.bisimilar);
  CHECK(replay_appbisim(L("\\.\\.1"), L("\\.\\.0"), Style::CBN, p4, *v.witness).empty());

  for (const char* id : {"lambda_cbn", "lambda_cbv"}) {
    const auto& b = builtin(id);
    const auto q = lam_params(b.depth, b.probe_size);
    for (const auto& k : b.equivalent) {
      CAPTURE(k.left);
      CHECK(appbisim(L(k.left.c_str()), L(k.right.c_str()), *b.style, q).bisimilar);
    }
    for (const auto& k : b.inequivalent) {
      CAPTURE(k.left);
      const Verdict w = appbisim(L(k.left.c_str()), L(k.right.c_str()), *b.style, q);
      REQUIRE(!w.bisimilar);
      CHECK(
          replay_appbisim(L(k.left.c_str()), L(k.right.c_str()), *b.style, q, *w.witness).empty());
    }
  }
}

TEST_CASE("applicative and coalgebraic games agree on closed terms") {
  const auto p = lam_params(5, 3);
  const auto terms = lambda::enumerate_closed_lambda(5);
  for (Style s : {Style::CBN, Style::CBV}) {
    for (std::size_t a = 0; a < terms.size(); ++a) {
      for (std::size_t b = a; b < terms.size(); ++b) {
        const Verdict x = appbisim(terms[a], terms[b], s, p);
        const Verdict y = coalgebraic_bisim(terms[a], terms[b], s, p);
        CHECK(x.bisimilar == y.bisimilar);
        if (!y.bisimilar) {
          CHECK(replay_coalgebraic(terms[a], terms[b], s, p, *y.witness).empty());
        }
      }
    }
  }
}

TEST_CASE("open extension") {
  const auto p = lam_params(6, 3);
  CHECK(open_ext(L("(\\.0) 0", 1), L("(\\.\\.1) 0 (\\.0)", 1), Style::CBN, p).bisimilar == false);
  CHECK(open_ext(L("(\\.0) 0", 1), L("(\\.0) 0", 1), Style::CBN, p).bisimilar);
  const Verdict v = open_ext(L("0", 1), L("(\\.0) 0", 1), Style::CBN, p);
  REQUIRE(!v.bisimilar);
  CHECK(!v.witness->substitution.empty());
  CHECK(!v.witness->substitution_text.empty());
  // Stage 0 delegates to appbisim.
  CHECK(open_ext(L("\\.0"), L("(\\.0) (\\.0)"), Style::CBN, p).bisimilar == false);
  // Open terms: the generic game agrees with the open extension.
  const LamTerm a = L("(\\.0) 1 0", 2), b = L("1 0", 2);
  CHECK(open_ext(a, b, Style::CBN, p).bisimilar ==
        coalgebraic_bisim(a, b, Style::CBN, p).bisimilar);
}

TEST_CASE("closure conditions on a bisimilar relation") {
  auto p = lam_params(5, 3);
  p.seed = testing::kSeed;
  std::vector<std::pair<LamTerm, LamTerm>> rel{
      {L("(\\.0) (\\.0)"), L("(\\.\\.0) (\\.0)")},
      {L("(\\.0) 0", 1), L("(\\.1) (\\.0)", 1)},
      {L("\\.(\\.0) 0", 1), L("\\.(\\.1) (\\.0)", 1)},
  };
  const ClosureReport ok = check_closure(rel, Style::CBN, p);
  CHECK(ok.pairs == 3);
  CHECK(ok.renamings_checked > 0);
  CHECK(ok.substitutions_checked > 0);
  CHECK(ok.ok());

  rel.push_back({L("0", 1), L("(\\.0) 0", 1)});
  const ClosureReport bad = check_closure(rel, Style::CBN, p);
  REQUIRE(!bad.ok());
  CHECK(bad.violations.front().pair == 3);
}

TEST_CASE("verdicts are deterministic") {
  const auto p = ski_params(6, 2);
  const Verdict a = bisim_det(ski(), ski_term("S K"), ski_term("S I"), p);
  const Verdict b = bisim_det(ski(), ski_term("S K"), ski_term("S I"), p);
  CHECK(a.bisimilar == b.bisimilar);
  CHECK(a.pairs_explored == b.pairs_explored);
  CHECK(describe(a) == describe(b));
}
