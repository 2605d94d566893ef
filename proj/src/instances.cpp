#include "hogsos/instances.hpp"

#include <map>
#include <mutex>

namespace hogsos {

namespace {

constexpr std::string_view kSkiu = R"(# Unary SKI combinatory logic.
signature SKIu
op S : 0 ; op K : 0 ; op I : 0
op S' : 1 ; op K' : 1 ; op S'' : 2
op app : 2 infix
rule [S]    |- S -x-> S'(x)
rule [K]    |- K -x-> K'(x)
rule [I]    |- I -x-> x
rule [S']   |- S'(x1) -x-> S''(x1, x)
rule [K']   |- K'(x1) -x-> x1
rule [S'']  |- S''(x1,x2) -x-> app(app(x1,x), app(x2,x))
rule [appL] x1 -> y1 |- app(x1,x2) -> app(y1,x2)
rule [app1] x1 -x2-> y |- app(x1,x2) -> y
)";

constexpr std::string_view kSkiuNd = R"(# Unary SKI with binary nondeterministic choice.
signature SKIu_nd
nondeterministic
op S : 0 ; op K : 0 ; op I : 0
op S' : 1 ; op K' : 1 ; op S'' : 2
op app : 2 infix
op ⊕ : 2
rule [S]    |- S -x-> S'(x)
rule [K]    |- K -x-> K'(x)
rule [I]    |- I -x-> x
rule [S']   |- S'(x1) -x-> S''(x1, x)
rule [K']   |- K'(x1) -x-> x1
rule [S'']  |- S''(x1,x2) -x-> app(app(x1,x), app(x2,x))
rule [appL] x1 -> y1 |- app(x1,x2) -> app(y1,x2)
rule [app1] x1 -x2-> y |- app(x1,x2) -> y
rule [or1]  |- ⊕(x1,x2) -> x1
rule [or2]  |- ⊕(x1,x2) -> x2
)";

// A divergent SKI term: (S I I)(S I I) reduces forever without exposing a
// function.
constexpr const char* kOmegaSki = "(S I I) (S I I)";

InstanceBundle first_order(std::string id, std::string_view text, std::string doc) {
  InstanceBundle b;
  b.id = std::move(id);
  b.kind = InstanceBundle::Kind::FirstOrder;
  b.doc = std::move(doc);
  b.spec_text = std::string(text);
  b.spec = load_spec(text);
  b.engine = std::make_shared<const Engine>(b.spec);
  return b;
}

InstanceBundle make_skiu() {
  auto b = first_order("skiu", kSkiu,
                       "Unary SKI: S, K, I and their partial applications S', K', S''. Every term "
                       "either reduces or acts as a function on terms.");
  b.golden = {
      {"(S K) I",
       {"(S K) I", "S'(K) I", "S''(K,I)"},
       "fun",
       "S",
       {"(K S) (I S)", "K'(S) (I S)", "S"},
       "fun"},
      {"(S K) K",
       {"(S K) K", "S'(K) K", "S''(K,K)"},
       "fun",
       "S",
       {"(K S) (K S)", "K'(S) (K S)", "S"},
       "fun"},
      {"S", {"S"}, "fun", std::nullopt, {}, ""},
  };
  b.equivalent = {
      {"(S K) I", "(S K) K", "both become the identity after three steps"},
      {"S''(K,I)", "S''(K,K)", "agree on every argument after two steps"},
      {"S'(K) I", "S'(K) K", "one step each, then the previous pair"},
  };
  b.inequivalent = {
      {"K", "I", "K' discards its second argument, I returns the first"},
      {"(S K) I", "I", "a reduction against a function"},
      {"S", "K", "S needs three arguments before reducing"},
  };
  return b;
}

InstanceBundle make_skiu_nd() {
  auto b = first_order("skiu_nd", kSkiuNd,
                       "Unary SKI with a binary choice operator that reduces to either argument.");
  const std::string om = kOmegaSki;
  b.golden = {
      {"(S K) I", {"(S K) I", "S'(K) I", "S''(K,I)"}, "fun", std::nullopt, {}, ""},
  };
  b.equivalent = {
      {"⊕(" + om + "," + om + ")", om, "choice between two divergent copies"},
      {"⊕(K,I)", "⊕(I,K)", "choice is symmetric"},
  };
  b.inequivalent = {
      {"⊕(K,I)", "K", "the I branch is unmatched"},
  };
  return b;
}

InstanceBundle make_lambda(lambda::Style style) {
  InstanceBundle b;
  b.kind = InstanceBundle::Kind::Lambda;
  b.style = style;
  b.step = [style](const lambda::LamTerm& t) { return lambda::step(t, style); };
  if (style == lambda::Style::CBN) {
    b.id = "lambda_cbn";
    b.doc = "Call-by-name lambda calculus on de Bruijn terms.";
    b.golden = {
        {"(\\.0) (\\.0)", {"(\\.0) (\\.0)", "\\.0"}, "fun", std::nullopt, {}, ""},
        {"(\\.\\.0) ((\\.0 0) (\\.0 0))",
         {"(\\.\\.0) ((\\.0 0) (\\.0 0))", "\\.0"},
         "fun",
         std::nullopt,
         {},
         ""},
    };
    b.equivalent = {
        {"(\\.0) (\\.0)", "(\\.\\.0) (\\.0)", "both reduce to \\.0 in one step"},
        {"(\\.0 0) (\\.0 0)", "(\\.0 0 0) (\\.0 0 0)", "both diverge"},
        {"(\\.0) (\\.\\.1)", "(\\.\\.\\.1) ((\\.0 0) (\\.0 0))",
         "both reduce to \\.\\.1 in one step"},
    };
    b.inequivalent = {
        {"\\.0", "(\\.0) (\\.0)", "an abstraction against a reduction"},
        {"(\\.\\.0) ((\\.0 0) (\\.0 0))", "\\.0", "a reduction against an abstraction"},
    };
  } else {
    b.id = "lambda_cbv";
    b.doc =
        "Call-by-value lambda calculus on de Bruijn terms; beta also fires when the argument "
        "cannot reduce.";
    b.golden = {
        {"(\\.0) (\\.0)", {"(\\.0) (\\.0)", "\\.0"}, "fun", std::nullopt, {}, ""},
        {"(\\.\\.0) ((\\.0 0) (\\.0 0))",
         {"(\\.\\.0) ((\\.0 0) (\\.0 0))", "(\\.\\.0) ((\\.0 0) (\\.0 0))"},
         "budget",
         std::nullopt,
         {},
         "",
         1},
    };
    b.equivalent = {
        {"(\\.0) (\\.0)", "(\\.\\.0) (\\.0)", "both reduce to \\.0 in one step"},
        {"(\\.0 0) (\\.0 0)", "(\\.0 0 0) (\\.0 0 0)", "both diverge"},
    };
    b.inequivalent = {
        {"(\\.\\.0) ((\\.0 0) (\\.0 0))", "\\.0", "the argument loops before the beta step"},
    };
  }
  return b;
}

}  // namespace

std::vector<std::string> builtin_ids() { return {"skiu", "skiu_nd", "lambda_cbn", "lambda_cbv"}; }

std::string_view builtin_spec_text(std::string_view id) {
  if (id == "skiu") return kSkiu;
  if (id == "skiu_nd") return kSkiuNd;
  throw Error("no spec text for instance '" + std::string(id) + "'");
}

const InstanceBundle& builtin(std::string_view id) {
  static std::mutex mutex;
  static std::map<std::string, InstanceBundle, std::less<>> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(id); it != cache.end()) return it->second;
  InstanceBundle b;
  if (id == "skiu") {
    b = make_skiu();
  } else if (id == "skiu_nd") {
    b = make_skiu_nd();
  } else if (id == "lambda_cbn") {
    b = make_lambda(lambda::Style::CBN);
  } else if (id == "lambda_cbv") {
    b = make_lambda(lambda::Style::CBV);
  } else {
    throw Error("unknown instance '" + std::string(id) + "'");
  }
  return cache.emplace(std::string(id), std::move(b)).first->second;
}

}  // namespace hogsos
