#include "hogsos/ho_spec.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace hogsos {

// ---------------------------------------------------------------------------
// MetaVar

MetaId MetaVar::encode() const {
  return static_cast<MetaId>(kind) | (static_cast<MetaId>(index) << 2) |
         (static_cast<MetaId>(at) << 22);
}

MetaVar MetaVar::decode(MetaId id) {
  MetaVar v;
  v.kind = static_cast<Kind>(id & 3);
  v.index = static_cast<std::uint32_t>((id >> 2) & 0xFFFFF);
  v.at = static_cast<std::uint32_t>(id >> 22);
  return v;
}

std::string MetaVar::name() const {
  switch (kind) {
    case Kind::Label:
      return "x";
    case Kind::Arg:
      return "x" + std::to_string(index);
    case Kind::Reduct:
      return "y" + std::to_string(index);
    case Kind::FunApp:
      return "y" + std::to_string(index) + "^x" + (at == 0 ? std::string() : std::to_string(at));
  }
  return "?";
}

namespace {

std::optional<std::uint32_t> parse_index(std::string_view s) {
  if (s.empty() || s.size() > 6 || s[0] == '0') return std::nullopt;
  std::uint32_t v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + static_cast<std::uint32_t>(c - '0');
  }
  return v;
}

// "x" -> 0, "x<j>" -> j.
std::optional<std::uint32_t> parse_label_ref(std::string_view s) {
  if (s == "x") return 0U;
  if (s.size() > 1 && s[0] == 'x') return parse_index(s.substr(1));
  return std::nullopt;
}

}  // namespace

std::optional<MetaVar> MetaVar::parse(std::string_view name) {
  if (name == "x") return label();
  if (name.size() < 2) return std::nullopt;
  if (name[0] == 'x') {
    if (auto i = parse_index(name.substr(1))) return arg(*i);
    return std::nullopt;
  }
  if (name[0] != 'y') return std::nullopt;
  const auto caret = name.find('^');
  if (caret == std::string_view::npos) {
    if (auto j = parse_index(name.substr(1))) return reduct(*j);
    return std::nullopt;
  }
  auto i = parse_index(name.substr(1, caret - 1));
  auto z = parse_label_ref(name.substr(caret + 1));
  if (!i || !z) return std::nullopt;
  return fun_app(*i, *z);
}

std::string print_rule_term(const Term& t, const Signature& sig) {
  return print_term(t, sig, [](MetaId id) { return MetaVar::decode(id).name(); });
}

std::string shape_to_string(PremiseShape w, std::size_t arity) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 1; i <= arity; ++i) {
    if (!reduces(w, i)) continue;
    if (!first) out += ',';
    out += std::to_string(i);
    first = false;
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// HOSpec

HOSpec::HOSpec(std::string name, Signature sig, std::vector<HORule> rules, Mode mode)
    : name_(std::move(name)), sig_(std::move(sig)), rules_(std::move(rules)), mode_(mode) {
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    index_[{rules_[i].op, rules_[i].shape}].push_back(i);
  }
}

std::span<const std::size_t> HOSpec::rules_for(OpId op, PremiseShape shape) const {
  auto it = index_.find({op, shape});
  if (it == index_.end()) return {};
  return it->second;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void collect_metas(const Term& t, std::vector<MetaId>& out) {
  if (t.is_meta()) {
    out.push_back(t.meta_id());
    return;
  }
  for (const auto& a : t.args()) collect_metas(a, out);
}

bool ops_well_formed(const Term& t, const Signature& sig, std::string& why) {
  if (t.is_meta()) return true;
  if (t.head() >= sig.size()) {
    why = "unknown operator id " + std::to_string(t.head());
    return false;
  }
  if (t.args().size() != sig.op(t.head()).arity) {
    why = "arity mismatch for '" + sig.op(t.head()).name + "'";
    return false;
  }
  return std::all_of(t.args().begin(), t.args().end(),
                     [&](const Term& a) { return ops_well_formed(a, sig, why); });
}

}  // namespace

std::vector<Issue> check_scope(const HORule& rule, const Signature& sig) {
  std::vector<Issue> issues;
  auto violation = [&](const MetaVar& v, const std::string& why) {
    issues.push_back(Issue{Issue::Kind::ScopeViolation, rule.op, rule.shape, rule.name, v,
                           "metavariable " + v.name() + " " + why});
  };
  std::string why;
  if (!ops_well_formed(rule.conclusion, sig, why)) {
    issues.push_back(Issue{Issue::Kind::Malformed, rule.op, rule.shape, rule.name, std::nullopt,
                           "conclusion: " + why});
    return issues;
  }
  const bool labelled = rule.kind == RuleKind::Labelled;
  const std::size_t n = rule.arity;
  std::vector<MetaId> metas;
  collect_metas(rule.conclusion, metas);
  std::sort(metas.begin(), metas.end());
  metas.erase(std::unique(metas.begin(), metas.end()), metas.end());
  for (MetaId id : metas) {
    const MetaVar v = MetaVar::decode(id);
    switch (v.kind) {
      case MetaVar::Kind::Label:
        if (!labelled) violation(v, "is only available in labelled conclusions");
        break;
      case MetaVar::Kind::Arg:
        if (v.index < 1 || v.index > n) violation(v, "is out of range");
        break;
      case MetaVar::Kind::Reduct:
        if (v.index < 1 || v.index > n) {
          violation(v, "is out of range");
        } else if (!reduces(rule.shape, v.index)) {
          violation(v, "needs argument " + std::to_string(v.index) + " to reduce");
        }
        break;
      case MetaVar::Kind::FunApp:
        if (v.index < 1 || v.index > n || v.at > n) {
          violation(v, "is out of range");
        } else if (reduces(rule.shape, v.index)) {
          violation(v, "needs argument " + std::to_string(v.index) + " to be a function");
        } else if (v.at == 0 && !labelled) {
          violation(v, "is only available in labelled conclusions");
        }
        break;
    }
  }
  return issues;
}

ValidationReport validate(const HOSpec& spec) {
  ValidationReport report;
  const auto& sig = spec.sig();
  for (const auto& rule : spec.rules()) {
    if (rule.op >= sig.size() || sig.op(rule.op).arity != rule.arity || rule.arity > 20 ||
        (rule.arity < 32 && (rule.shape >> rule.arity) != 0)) {
      report.issues.push_back(Issue{Issue::Kind::Malformed, rule.op, rule.shape, rule.name,
                                    std::nullopt, "rule head does not match the signature"});
      continue;
    }
    auto scope = check_scope(rule, sig);
    report.issues.insert(report.issues.end(), scope.begin(), scope.end());
  }
  for (OpId op = 0; op < sig.size(); ++op) {
    const std::size_t n = sig.op(op).arity;
    if (n > 20) {
      report.issues.push_back(
          Issue{Issue::Kind::Malformed, op, 0, {}, std::nullopt, "arity too large to check"});
      continue;
    }
    for (PremiseShape w = 0; w < (PremiseShape{1} << n); ++w) {
      const auto matching = spec.rules_for(op, w);
      const std::string where = sig.op(op).name + ", W=" + shape_to_string(w, n);
      if (matching.empty()) {
        report.issues.push_back(Issue{
            Issue::Kind::MissingRule, op, w, {}, std::nullopt, "no rule for (" + where + ")"});
      } else if (spec.mode() == Mode::Deterministic && matching.size() > 1) {
        for (std::size_t k = 1; k < matching.size(); ++k) {
          report.issues.push_back(Issue{Issue::Kind::DuplicateRule, op, w,
                                        spec.rule(matching[k]).name, std::nullopt,
                                        "more than one rule for (" + where + ")"});
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Desugaring

DesugarResult desugar(const std::string& name, const Signature& sig,
                      std::span<const PartialRule> partial, Mode mode) {
  std::vector<HORule> rules;
  std::vector<Diagnostic> diagnostics;
  for (const auto& pr : partial) {
    if (pr.op >= sig.size()) throw Error("rule " + pr.name + ": unknown operator");
    const std::size_t n = sig.op(pr.op).arity;
    if (n > 20) throw Error("rule " + pr.name + ": arity too large");
    PremiseShape must_reduce = 0;
    PremiseShape must_apply = 0;
    for (const auto& p : pr.premises) {
      if (p.position < 1 || p.position > n) {
        throw Error("rule " + pr.name + ": premise on x" + std::to_string(p.position) +
                    " is out of range");
      }
      const PremiseShape bit = PremiseShape{1} << (p.position - 1);
      if (p.kind == Premise::Kind::Reduces) {
        must_reduce |= bit;
      } else {
        if (p.at > n) throw Error("rule " + pr.name + ": premise label out of range");
        if (p.at == 0 && pr.kind != RuleKind::Labelled) {
          throw Error("rule " + pr.name + ": premise applies x" + std::to_string(p.position) +
                      " to the label x, but the conclusion is unlabelled");
        }
        must_apply |= bit;
      }
    }
    if (must_reduce & must_apply) {
      throw Error("rule " + pr.name + ": contradictory premises (an argument both reduces and " +
                  "is applied)");
    }
    std::vector<MetaId> metas;
    collect_metas(pr.conclusion, metas);
    for (MetaId id : metas) {
      const MetaVar v = MetaVar::decode(id);
      if (v.index < 1 || v.index > n) continue;  // reported per completion
      const PremiseShape bit = PremiseShape{1} << (v.index - 1);
      if (v.kind == MetaVar::Kind::FunApp && (must_reduce & bit)) {
        throw Error("rule " + pr.name + ": conclusion uses " + v.name() +
                    " but no premise justifies applying x" + std::to_string(v.index));
      }
      if (v.kind == MetaVar::Kind::Reduct && (must_apply & bit)) {
        throw Error("rule " + pr.name + ": conclusion uses " + v.name() + " but x" +
                    std::to_string(v.index) + " is applied, not reduced");
      }
    }
    std::vector<PremiseShape> completions;
    for (PremiseShape w = 0; w < (PremiseShape{1} << n); ++w) {
      if ((w & must_reduce) == must_reduce && (w & must_apply) == 0) completions.push_back(w);
    }
    for (std::size_t k = 0; k < completions.size(); ++k) {
      HORule rule;
      rule.name = pr.name;
      if (completions.size() > 1) {
        // -a .. -z, then -aa, -ab, ...
        std::string suffix;
        std::size_t idx = k;
        do {
          suffix.insert(suffix.begin(), static_cast<char>('a' + idx % 26));
          idx = idx / 26;
        } while (idx-- > 0);
        rule.name += "-" + suffix;
      }
      rule.op = pr.op;
      rule.arity = n;
      rule.shape = completions[k];
      rule.kind = pr.kind;
      rule.conclusion = pr.conclusion;
      auto scope = check_scope(rule, sig);
      if (!scope.empty()) {
        for (const auto& issue : scope) {
          diagnostics.push_back(Diagnostic{rule.name, rule.shape,
                                           "completion W=" + shape_to_string(rule.shape, n) +
                                               " is ill-scoped: " + issue.message});
        }
        continue;
      }
      rules.push_back(std::move(rule));
    }
  }
  return DesugarResult{HOSpec(name, sig, std::move(rules), mode), std::move(diagnostics)};
}

DesugarResult desugar(const SpecSource& src) {
  return desugar(src.name, src.sig, src.rules, src.mode);
}

// ---------------------------------------------------------------------------
// Spec text

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {}

  SpecSource parse() {
    std::size_t line_start = 0;
    while (line_start <= text_.size()) {
      std::size_t line_end = text_.find('\n', line_start);
      if (line_end == std::string_view::npos) line_end = text_.size();
      ++line_no_;
      std::string_view line = text_.substr(line_start, line_end - line_start);
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      // Statements are separated by ';'.
      std::size_t s = 0;
      while (s <= line.size()) {
        std::size_t e = line.find(';', s);
        if (e == std::string_view::npos) e = line.size();
        offset_ = line_start + s;
        statement(trim(line.substr(s, e - s)));
        s = e + 1;
      }
      line_start = line_end + 1;
    }
    return std::move(src_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_no_) + ": " + msg, offset_);
  }

  static std::pair<std::string_view, std::string_view> split_word(std::string_view s) {
    const auto sp = s.find_first_of(" \t");
    if (sp == std::string_view::npos) return {s, {}};
    return {s.substr(0, sp), trim(s.substr(sp))};
  }

  void statement(std::string_view st) {
    if (st.empty()) return;
    auto [kw, rest] = split_word(st);
    if (kw == "signature") {
      if (rest.empty()) fail("signature needs a name");
      src_.name = std::string(rest);
    } else if (kw == "nondeterministic") {
      src_.mode = Mode::Nondeterministic;
    } else if (kw == "deterministic") {
      src_.mode = Mode::Deterministic;
    } else if (kw == "op") {
      op_decl(rest);
    } else if (kw == "rule") {
      rule(rest);
    } else {
      fail("unknown statement '" + std::string(kw) + "'");
    }
  }

  void op_decl(std::string_view s) {
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos) fail("expected 'op NAME : ARITY'");
    const std::string_view name = trim(s.substr(0, colon));
    auto [arity_text, flags] = split_word(trim(s.substr(colon + 1)));
    OpDecl decl;
    decl.name = std::string(name);
    if (arity_text.empty() || !std::all_of(arity_text.begin(), arity_text.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      fail("bad arity '" + std::string(arity_text) + "'");
    }
    decl.arity = std::stoul(std::string(arity_text));
    if (flags == "infix") {
      decl.infix = true;
    } else if (!flags.empty()) {
      fail("unknown operator flag '" + std::string(flags) + "'");
    }
    for (unsigned char c : decl.name) {
      if (!(std::isalnum(c) || c == '_' || c == '\'' || c == '^' || c >= 0x80)) {
        fail("bad operator name '" + decl.name + "'");
      }
    }
    try {
      src_.sig.add(std::move(decl));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  void rule(std::string_view s) {
    PartialRule pr;
    if (!s.empty() && s.front() == '[') {
      const auto close = s.find(']');
      if (close == std::string_view::npos) fail("unterminated rule name");
      pr.name = std::string(trim(s.substr(1, close - 1)));
      s = trim(s.substr(close + 1));
    } else {
      pr.name = "rule" + std::to_string(src_.rules.size() + 1);
    }
    const auto turnstile = s.find("|-");
    if (turnstile == std::string_view::npos) fail("rule needs '|-'");
    const std::string_view premises = trim(s.substr(0, turnstile));
    const std::string_view conclusion = trim(s.substr(turnstile + 2));

    // Conclusion arrow: the first '-' outside parentheses.
    std::size_t depth = 0;
    std::size_t dash = std::string_view::npos;
    for (std::size_t i = 0; i < conclusion.size(); ++i) {
      const char c = conclusion[i];
      if (c == '(') ++depth;
      if (c == ')' && depth > 0) --depth;
      if (c == '-' && depth == 0) {
        dash = i;
        break;
      }
    }
    if (dash == std::string_view::npos) fail("conclusion needs '->' or '-x->'");
    std::string_view rhs;
    if (dash + 1 < conclusion.size() && conclusion[dash + 1] == '>') {
      pr.kind = RuleKind::Unlabelled;
      rhs = conclusion.substr(dash + 2);
    } else {
      const auto arrow = conclusion.find("->", dash + 1);
      if (arrow == std::string_view::npos) fail("conclusion needs '->' or '-x->'");
      if (trim(conclusion.substr(dash + 1, arrow - dash - 1)) != "x") {
        fail("a labelled conclusion must use the label x");
      }
      pr.kind = RuleKind::Labelled;
      rhs = conclusion.substr(arrow + 2);
    }
    const std::string_view lhs = trim(conclusion.substr(0, dash));

    // Left-hand side: f(x1, ..., xn).
    Term head = parse_in_rule(lhs, [](std::string_view n) -> std::optional<MetaId> {
      auto v = MetaVar::parse(n);
      if (v && v->kind == MetaVar::Kind::Arg) return v->encode();
      return std::nullopt;
    });
    if (!head.is_op()) fail("rule source must be an operator applied to x1..xn");
    pr.op = head.head();
    const std::size_t n = head.args().size();
    for (std::size_t i = 0; i < n; ++i) {
      if (head.arg(i) != MetaVar::arg(static_cast<std::uint32_t>(i + 1)).term()) {
        fail("argument " + std::to_string(i + 1) + " of the rule source must be x" +
             std::to_string(i + 1));
      }
    }

    std::unordered_map<std::string, MetaVar> bound;
    if (!premises.empty()) {
      static const std::regex premise_re(
          R"(^\s*([A-Za-z_][A-Za-z0-9_']*)\s*(?:-\s*([A-Za-z_][A-Za-z0-9_]*)\s*)?->\s*([^\s,]+)\s*$)");
      std::size_t start = 0;
      while (start <= premises.size()) {
        std::size_t comma = premises.find(',', start);
        if (comma == std::string_view::npos) comma = premises.size();
        const std::string piece(premises.substr(start, comma - start));
        start = comma + 1;
        std::smatch m;
        if (!std::regex_match(piece, m, premise_re)) fail("bad premise '" + piece + "'");
        auto source = MetaVar::parse(m[1].str());
        if (!source || source->kind != MetaVar::Kind::Arg) {
          fail("premise source must be some xi, got '" + m[1].str() + "'");
        }
        Premise p;
        p.position = source->index;
        p.bound = m[3].str();
        MetaVar target;
        if (m[2].matched) {
          auto z = parse_label_ref(m[2].str());
          if (!z) fail("premise label must be x or some xj, got '" + m[2].str() + "'");
          p.kind = Premise::Kind::Applied;
          p.at = *z;
          target = MetaVar::fun_app(p.position, p.at);
        } else {
          p.kind = Premise::Kind::Reduces;
          target = MetaVar::reduct(p.position);
        }
        if (auto [it, fresh] = bound.emplace(p.bound, target); !fresh && it->second != target) {
          fail("name '" + p.bound + "' is bound twice");
        }
        pr.premises.push_back(std::move(p));
      }
    }

    pr.conclusion =
        parse_in_rule(trim(rhs), [&bound](std::string_view name) -> std::optional<MetaId> {
          if (auto it = bound.find(std::string(name)); it != bound.end())
            return it->second.encode();
          if (auto v = MetaVar::parse(name)) return v->encode();
          return std::nullopt;
        });
    src_.rules.push_back(std::move(pr));
  }

  Term parse_in_rule(std::string_view s, const MetaResolver& resolve) {
    try {
      return parse_term(s, src_.sig, resolve);
    } catch (const ParseError& e) {
      fail(e.what());
    }
  }

  std::string_view text_;
  SpecSource src_;
  std::size_t line_no_ = 0;
  std::size_t offset_ = 0;
};

}  // namespace

SpecSource parse_spec(std::string_view text) { return SpecParser(text).parse(); }

std::shared_ptr<const HOSpec> load_spec(std::string_view text) {
  auto result = desugar(parse_spec(text));
  std::string problems;
  for (const auto& d : result.diagnostics) problems += "\n  " + d.rule + ": " + d.message;
  for (const auto& i : validate(result.spec).issues) problems += "\n  " + i.message;
  if (!problems.empty()) throw Error("invalid spec '" + result.spec.name() + "':" + problems);
  return std::make_shared<const HOSpec>(std::move(result.spec));
}

// ---------------------------------------------------------------------------
// Law instantiation

std::string gen::print(MetaId id) { return (is_x(id) ? "X" : "Y") + std::to_string(index(id)); }

std::string print_law_value(const LawValue& v, const Signature& sig) {
  if (v.is_reduce()) return print_term(v.reduct(), sig, gen::print);
  std::string out = "[";
  for (std::size_t u = 0; u < v.table().size(); ++u) {
    if (u) out += ", ";
    out += "X" + std::to_string(u) + " -> " + print_term(v.table()[u], sig, gen::print);
  }
  return out + "]";
}

std::string print_law_input(const LawInput& w, const Signature& sig) {
  std::string out = sig.op(w.op).name + "(";
  for (std::size_t i = 0; i < w.args.size(); ++i) {
    if (i) out += ", ";
    const auto& [u, v] = w.args[i];
    out += "(X" + std::to_string(u) + ", ";
    if (v.is_reduce()) {
      out += "Y" + std::to_string(v.reduct());
    } else {
      out += "[";
      for (std::size_t k = 0; k < v.table().size(); ++k) {
        if (k) out += ",";
        out += "Y" + std::to_string(v.table()[k]);
      }
      out += "]";
    }
    out += ")";
  }
  return out + ")";
}

namespace {

Term instantiate_conclusion(const Term& t, const LawInput& w,
                            const std::optional<std::size_t>& label) {
  if (t.is_op()) {
    std::vector<Term> args;
    args.reserve(t.args().size());
    for (const auto& a : t.args()) args.push_back(instantiate_conclusion(a, w, label));
    return Term::op(t.head(), std::move(args));
  }
  const MetaVar v = MetaVar::decode(t.meta_id());
  switch (v.kind) {
    case MetaVar::Kind::Label:
      return Term::meta(gen::x(label.value()));
    case MetaVar::Kind::Arg:
      return Term::meta(gen::x(w.args.at(v.index - 1).first));
    case MetaVar::Kind::Reduct:
      return Term::meta(gen::y(w.args.at(v.index - 1).second.reduct()));
    case MetaVar::Kind::FunApp: {
      const auto& table = w.args.at(v.index - 1).second.table();
      const std::size_t at = v.at == 0 ? label.value() : w.args.at(v.at - 1).first;
      return Term::meta(gen::y(table.at(at)));
    }
  }
  throw Error("corrupt metavariable");
}

}  // namespace

std::vector<LawValue> instantiate_law(const HOSpec& spec, std::size_t nx, std::size_t ny,
                                      const LawInput& w) {
  const auto& sig = spec.sig();
  if (w.op >= sig.size()) throw Error("law input: unknown operator");
  const std::size_t n = sig.op(w.op).arity;
  if (w.args.size() != n) throw Error("law input: arity mismatch for " + sig.op(w.op).name);
  PremiseShape shape = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [u, v] = w.args[i];
    if (u >= nx) throw Error("law input: state component outside X");
    if (v.is_reduce()) {
      if (v.reduct() >= ny) throw Error("law input: reduct outside Y");
      shape |= PremiseShape{1} << i;
    } else {
      if (v.table().size() != nx) throw Error("law input: function table is not total on X");
      for (std::size_t y : v.table()) {
        if (y >= ny) throw Error("law input: function value outside Y");
      }
    }
  }
  const auto matching = spec.rules_for(w.op, shape);
  if (matching.empty()) {
    throw Error("no rule for (" + sig.op(w.op).name + ", W=" + shape_to_string(shape, n) + ")");
  }
  std::vector<LawValue> out;
  for (std::size_t idx : matching) {
    const auto& rule = spec.rule(idx);
    if (rule.kind == RuleKind::Unlabelled) {
      out.push_back(LawValue{instantiate_conclusion(rule.conclusion, w, std::nullopt)});
    } else {
      std::vector<Term> table;
      table.reserve(nx);
      for (std::size_t u = 0; u < nx; ++u)
        table.push_back(instantiate_conclusion(rule.conclusion, w, u));
      out.push_back(LawValue{std::move(table)});
    }
  }
  return out;
}

}  // namespace hogsos
