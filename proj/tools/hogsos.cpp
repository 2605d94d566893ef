// hogsos: command-line front end.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "hogsos/bisim.hpp"
#include "hogsos/harness.hpp"
#include "hogsos/instances.hpp"
#include "hogsos/law_lab.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace hogsos;

namespace {

struct Options {
  bool json = false;
  bool expect_bisimilar = false;
  std::size_t steps = 100;
  std::size_t depth = 8;
  std::size_t probe_size = 3;
  bool opaque = false;
  std::string style = "cbn";
  std::size_t stage = 0;
  std::size_t max_set = 2;
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = 1;
  std::size_t contexts = 200;
  std::size_t context_size = 5;
  bool mutant = false;
};

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNotBisimilar = 2;

class UsageError : public Error {
  using Error::Error;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> data_dirs() {
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("HOGSOS_DATA_DIR")) dirs.emplace_back(env);
#ifdef HOGSOS_INSTALL_DATA_DIR
  dirs.emplace_back(HOGSOS_INSTALL_DATA_DIR);
#endif
#ifdef HOGSOS_SOURCE_DATA_DIR
  dirs.emplace_back(HOGSOS_SOURCE_DATA_DIR);
#endif
  return dirs;
}

// A path, a file name found in a data directory, or a builtin id.
struct Target {
  std::string id;
  std::string text;  // first-order only
  const InstanceBundle* bundle = nullptr;
  std::shared_ptr<const Engine> engine;
  std::optional<lambda::Style> style;

  bool is_lambda() const { return style.has_value(); }
};

std::optional<std::string> find_spec_text(const std::string& arg) {
  if (fs::is_regular_file(arg)) return read_file(arg);
  if (fs::path(arg).has_parent_path()) return std::nullopt;
  for (const auto& dir : data_dirs()) {
    for (const fs::path& cand : {dir / arg, dir / (arg + ".spec")}) {
      if (fs::is_regular_file(cand)) return read_file(cand);
    }
  }
  return std::nullopt;
}

Target resolve(const std::string& arg) {
  Target t;
  t.id = arg;
  const auto ids = builtin_ids();
  const bool is_builtin = std::find(ids.begin(), ids.end(), arg) != ids.end();
  if (is_builtin && !fs::is_regular_file(arg)) {
    t.bundle = &builtin(arg);
    t.engine = t.bundle->engine;
    t.style = t.bundle->style;
    t.text = t.bundle->spec_text;
    return t;
  }
  auto text = find_spec_text(arg);
  if (!text) throw UsageError("no spec file or builtin instance named '" + arg + "'");
  t.text = *text;
  t.engine = std::make_shared<const Engine>(load_spec(t.text));
  return t;
}

lambda::Style style_of(const Options& o) {
  auto s = lambda::parse_style(o.style);
  if (!s) throw UsageError("unknown style '" + o.style + "' (expected cbn or cbv)");
  return *s;
}

void emit(const Options& o, const json& j, const std::string& text) {
  if (o.json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON renderings

const char* move_name(WitnessStep::Move m) {
  switch (m) {
    case WitnessStep::Move::Reduce:
      return "reduce";
    case WitnessStep::Move::Apply:
      return "apply";
    case WitnessStep::Move::Substitute:
      return "substitute";
  }
  return "?";
}

json to_json(const Witness& w) {
  json j;
  j["clause"] = clause_id(w.clause);
  j["left"] = w.left;
  j["right"] = w.right;
  json path = json::array();
  for (const auto& s : w.path) {
    json step;
    step["move"] = move_name(s.move);
    if (!s.label.empty()) step["label"] = s.label;
    if (!s.probes.empty()) step["probes"] = s.probes;
    step["left"] = s.left;
    step["right"] = s.right;
    step["left_rule"] = s.left_rule;
    step["right_rule"] = s.right_rule;
    path.push_back(std::move(step));
  }
  j["path"] = std::move(path);
  j["left_behavior"] = w.left_behavior;
  j["right_behavior"] = w.right_behavior;
  if (!w.substitution_text.empty()) {
    j["substitution"] = w.substitution;
    j["substitution_text"] = w.substitution_text;
  }
  return j;
}

json to_json(const NdRefutation& r) {
  json j;
  j["left"] = r.left;
  j["right"] = r.right;
  j["challenger"] = r.challenger_left ? "left" : "right";
  j["member"] = r.member;
  j["clause"] = clause_id(r.clause);
  json answers = json::array();
  for (const auto& a : r.answers) {
    json aj;
    aj["candidate"] = a.candidate;
    aj["probe"] = a.probe ? json(*a.probe) : json(nullptr);
    aj["reason"] = a.reason ? to_json(*a.reason) : json(nullptr);
    answers.push_back(std::move(aj));
  }
  j["answers"] = std::move(answers);
  return j;
}

json to_json(const Verdict& v) {
  json j;
  j["verdict"] = v.bisimilar ? "BisimilarUpTo" : "NotBisimilar";
  j["depth"] = v.depth;
  j["probe_fingerprint"] = hex64(v.fingerprint);
  j["pairs_explored"] = v.pairs_explored;
  j["witness"] = v.witness ? to_json(*v.witness) : json(nullptr);
  if (v.refutation) j["refutation"] = to_json(*v.refutation);
  return j;
}

json to_json(const DetBehavior& b, const Engine& e) {
  json j;
  j["kind"] = b.is_reduce() ? "reduce" : "fun";
  j["rule"] = e.rule_name(b);
  if (b.is_reduce()) {
    j["term"] = e.print(b.reduct());
  } else {
    json args = json::array();
    for (const auto& a : b.args()) args.push_back(e.print(a));
    j["args"] = std::move(args);
  }
  return j;
}

const char* lam_kind(lambda::LamBehavior::Kind k) {
  switch (k) {
    case lambda::LamBehavior::Kind::Reduce:
      return "reduce";
    case lambda::LamBehavior::Kind::Fun:
      return "fun";
    case lambda::LamBehavior::Kind::Stuck:
      return "stuck";
  }
  return "?";
}

int verdict_exit(const Options& o, const Verdict& v) {
  return o.expect_bisimilar && !v.bisimilar ? kNotBisimilar : kOk;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_validate(const Options& o, const std::string& arg) {
  std::string text;
  if (auto found = find_spec_text(arg)) {
    text = *found;
  } else {
    text = std::string(builtin_spec_text(arg));
  }
  const SpecSource src = parse_spec(text);
  const DesugarResult d = desugar(src);
  const ValidationReport rep = validate(d.spec);
  const bool ok = rep.ok() && d.diagnostics.empty();

  json j;
  j["ok"] = ok;
  j["name"] = d.spec.name();
  j["operators"] = d.spec.sig().size();
  j["rules"] = d.spec.rules().size();
  json issues = json::array();
  std::string text_out;
  for (const auto& dg : d.diagnostics) {
    issues.push_back({{"kind", "dropped"}, {"rule", dg.rule}, {"message", dg.message}});
    text_out += "dropped " + dg.rule + ": " + dg.message + "\n";
  }
  for (const auto& is : rep.issues) {
    issues.push_back({{"kind", "issue"}, {"rule", is.rule}, {"message", is.message}});
    text_out += is.message + "\n";
  }
  j["issues"] = std::move(issues);
  if (ok) text_out = "ok";
  emit(o, j, text_out);
  return ok ? kOk : kFailure;
}

int cmd_run(const Options& o, const std::string& spec, const std::string& term) {
  const Target t = resolve(spec);
  json j;
  json trace = json::array();
  std::string text;
  if (t.is_lambda()) {
    const auto tr = lambda::trace_lambda(lambda::parse_lambda(term, o.stage), *t.style, o.steps);
    for (const auto& x : tr.terms) trace.push_back(lambda::print_lambda(x));
    static constexpr const char* names[] = {"fun", "stuck", "budget"};
    j["trace"] = trace;
    j["terminal"] = names[static_cast<int>(tr.terminal)];
  } else {
    if (!t.engine->deterministic()) throw UsageError("run needs a deterministic spec; use step");
    const auto tr = t.engine->trace(parse_term(term, t.engine->sig()), o.steps);
    for (const auto& x : tr.terms) trace.push_back(t.engine->print(x));
    j["trace"] = trace;
    j["terminal"] = tr.terminal == Trace::Terminal::Fun ? "fun" : "budget";
  }
  for (std::size_t i = 0; i < trace.size(); ++i) {
    text += (i ? "-> " : "   ") + trace[i].get<std::string>() + "\n";
  }
  text += "[" + j["terminal"].get<std::string>() + "]";
  emit(o, j, text);
  return kOk;
}

int cmd_step(const Options& o, const std::string& spec, const std::string& term) {
  const Target t = resolve(spec);
  json j;
  std::string text;
  if (t.is_lambda()) {
    const auto b = lambda::step(lambda::parse_lambda(term, o.stage), *t.style);
    j["kind"] = lam_kind(b.kind);
    j["rule"] = b.rule;
    if (b.term) j[b.is_fun() ? "body" : "term"] = lambda::print_lambda(*b.term);
    text = std::string(lam_kind(b.kind)) + " [" + b.rule + "]" +
           (b.term ? " " + lambda::print_lambda(*b.term) : "");
  } else {
    const Engine& e = *t.engine;
    const Term x = parse_term(term, e.sig());
    std::vector<DetBehavior> members;
    if (e.deterministic()) {
      members.push_back(e.step(x));
      j = to_json(members[0], e);
    } else {
      members = e.step_nd(x).members;
      json arr = json::array();
      for (const auto& b : members) arr.push_back(to_json(b, e));
      j["behaviours"] = std::move(arr);
    }
    for (const auto& b : members) text += e.print(b) + "\n";
  }
  emit(o, j, text);
  return kOk;
}

int cmd_bisim(const Options& o, const std::string& spec, const std::string& a,
              const std::string& b) {
  const Target t = resolve(spec);
  Verdict v;
  std::string replayed;
  if (t.is_lambda()) {
    LamBisimParams p;
    p.depth = o.depth;
    p.probes = default_lambda_probes(o.probe_size);
    const auto l = lambda::parse_lambda(a), r = lambda::parse_lambda(b);
    v = appbisim(l, r, *t.style, p);
    if (v.witness) replayed = replay_appbisim(l, r, *t.style, p, *v.witness);
  } else {
    const Engine& e = *t.engine;
    BisimParams p;
    p.depth = o.depth;
    p.probes = default_probes(e.sig(), o.probe_size);
    p.opaque_probe = o.opaque;
    const Term l = parse_term(a, e.sig()), r = parse_term(b, e.sig());
    if (e.deterministic()) {
      v = bisim_det(e, l, r, p);
      if (v.witness) replayed = replay(e, l, r, p, *v.witness);
    } else {
      v = bisim_nd(e, l, r, p);
      if (v.refutation) replayed = replay_nd(e, l, r, p, *v.refutation);
    }
  }
  json j = to_json(v);
  if (!v.bisimilar) j["replay"] = replayed.empty() ? "ok" : replayed;
  emit(o, j, describe(v));
  return verdict_exit(o, v);
}

int cmd_appbisim(const Options& o, const std::string& a, const std::string& b) {
  const lambda::Style style = style_of(o);
  LamBisimParams p;
  p.depth = o.depth;
  p.probes = default_lambda_probes(o.probe_size);
  p.seed = o.seed;
  const auto l = lambda::parse_lambda(a, o.stage), r = lambda::parse_lambda(b, o.stage);
  Verdict v = o.stage == 0 ? appbisim(l, r, style, p) : open_ext(l, r, style, p);
  json j = to_json(v);
  if (v.witness && o.stage == 0) {
    const std::string replayed = replay_appbisim(l, r, style, p, *v.witness);
    j["replay"] = replayed.empty() ? "ok" : replayed;
  }
  emit(o, j, describe(v));
  return verdict_exit(o, v);
}

json law_json(const LawReport& r) {
  json j;
  j["instances"] = r.instances;
  j["checks"] = r.checks;
  j["failures"] = r.failures;
  if (r.counterexamples.empty()) {
    j["counterexample"] = nullptr;
  } else {
    const auto& c = r.counterexamples.front();
    j["counterexample"] = {{"X", c.inst.nx},   {"X'", c.inst.nx2}, {"Y", c.inst.ny},
                           {"Y'", c.inst.ny2}, {"f", c.inst.f},    {"g", c.inst.g},
                           {"input", c.input}, {"leg1", c.leg1},   {"leg2", c.leg2}};
  }
  return j;
}

int cmd_lawcheck(const Options& o, const std::string& spec) {
  const Target t = resolve(spec);
  if (t.is_lambda()) throw UsageError("lawcheck needs a first-order spec");
  if (o.max_set > kLawSetLimit) {
    throw UsageError("--max-set is capped at " + std::to_string(kLawSetLimit));
  }
  const auto& s = t.engine->spec_ptr();
  const Law law = o.mutant ? label_inspecting_mutant(s) : spec_law(s);
  const LawReport din = sweep_dinaturality(s->sig(), law, o.max_set);
  const LawReport nat = sweep_naturality_y(s->sig(), law, o.max_set);
  json j;
  j["spec"] = s->name();
  j["law"] = o.mutant ? "label-inspecting mutant" : "spec";
  j["max_set"] = o.max_set;
  j["dinaturality"] = law_json(din);
  j["naturality_y"] = law_json(nat);
  j["ok"] = din.ok() && nat.ok();

  std::ostringstream text;
  auto line = [&](const char* name, const LawReport& r) {
    text << name << ": " << r.instances << " instances, " << r.checks << " checks, " << r.failures
         << " failures\n";
    if (!r.counterexamples.empty()) {
      const auto& c = r.counterexamples.front();
      text << "  first counterexample |X|=" << c.inst.nx << " |X'|=" << c.inst.nx2
           << " |Y|=" << c.inst.ny << " |Y'|=" << c.inst.ny2 << "\n  input " << c.input
           << "\n  leg 1 " << c.leg1 << "\n  leg 2 " << c.leg2 << "\n";
    }
  };
  line("dinaturality", din);
  line("naturality in Y", nat);
  emit(o, j, text.str());
  return kOk;
}

int cmd_congruence(const Options& o, const std::string& spec,
                   std::vector<std::pair<std::string, std::string>> pairs) {
  const Target t = resolve(spec);
  InstanceBundle adhoc;
  const InstanceBundle* bundle = t.bundle;
  if (!bundle) {
    adhoc.id = t.id;
    adhoc.spec_text = t.text;
    adhoc.spec = t.engine->spec_ptr();
    adhoc.engine = t.engine;
    bundle = &adhoc;
  }
  if (pairs.empty()) {
    for (const auto& k : bundle->equivalent) pairs.emplace_back(k.left, k.right);
  }
  if (pairs.empty()) throw UsageError("no pairs given");

  CongruenceParams p;
  p.n_contexts = o.contexts;
  p.max_context_size = o.context_size;
  p.depth = o.depth;
  p.probe_size = o.probe_size;
  p.opaque_probe = o.opaque;
  p.seed = o.seed;
  p.threads = std::max<std::size_t>(1, o.threads);
  const CongruenceReport rep = congruence_test(*bundle, pairs, p);

  json j;
  j["header"] = rep.header;
  j["instance"] = rep.instance;
  j["params"] = {{"contexts", p.n_contexts}, {"max_context_size", p.max_context_size},
                 {"depth", p.depth},         {"probe_size", p.probe_size},
                 {"opaque", p.opaque_probe}, {"seed", p.seed}};
  json pj = json::array();
  std::ostringstream text;
  text << rep.header << "\n\n";
  for (const auto& po : rep.pairs) {
    json x = {{"left", po.left},
              {"right", po.right},
              {"accepted", po.accepted},
              {"contexts_tested", po.contexts_tested}};
    if (!po.accepted) x["pre_verification"] = to_json(po.pre);
    pj.push_back(std::move(x));
    text << (po.accepted ? "pair    " : "REJECTED ") << po.left << "  ~  " << po.right << "  ("
         << po.contexts_tested << " contexts)\n";
    if (!po.accepted) text << "  " << describe(po.pre) << "\n";
  }
  j["pairs"] = std::move(pj);
  j["contexts"] = rep.contexts;
  json cj = json::array();
  for (const auto& c : rep.counterexamples) {
    cj.push_back({{"pair", c.pair},
                  {"context", c.context},
                  {"context_text", c.context_text},
                  {"left", c.left},
                  {"right", c.right},
                  {"verdict", to_json(c.verdict)}});
    text << "COUNTEREXAMPLE pair " << c.pair << " in " << c.context_text << ": " << c.left << " vs "
         << c.right << "\n  " << describe(c.verdict) << "\n";
  }
  j["counterexamples"] = std::move(cj);
  j["ok"] = rep.ok();
  text << (rep.ok() ? "no counterexamples" : "congruence check failed");
  emit(o, j, text.str());
  return rep.ok() ? kOk : (o.expect_bisimilar ? kNotBisimilar : kOk);
}

int cmd_instances(const Options& o) {
  json arr = json::array();
  std::ostringstream text;
  for (const auto& id : builtin_ids()) {
    const auto& b = builtin(id);
    json x;
    x["id"] = b.id;
    x["kind"] = b.kind == InstanceBundle::Kind::Lambda ? "lambda" : "first-order";
    x["doc"] = b.doc;
    if (b.spec) {
      x["rules"] = b.spec->rules().size();
      x["deterministic"] = b.engine->deterministic();
    }
    auto pairs = [](const std::vector<KnownPair>& ps) {
      json a = json::array();
      for (const auto& p : ps)
        a.push_back({{"left", p.left}, {"right", p.right}, {"note", p.note}});
      return a;
    };
    x["equivalent"] = pairs(b.equivalent);
    x["inequivalent"] = pairs(b.inequivalent);
    x["depth"] = b.depth;
    x["probe_size"] = b.probe_size;
    arr.push_back(std::move(x));
    text << b.id << "\n  " << b.doc << "\n";
  }
  emit(o, json{{"instances", arr}}, text.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order GSOS workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI file (same keys as the flags)");

  Options o;
  app.add_flag("--json", o.json, "Machine-readable output");
  app.add_flag("--expect-bisimilar", o.expect_bisimilar, "Exit 2 on a NotBisimilar verdict");
  app.add_option("--steps", o.steps, "Step budget for run")->capture_default_str();
  app.add_option("--depth", o.depth, "Game depth")->capture_default_str();
  app.add_option("--probe-size", o.probe_size, "Maximal probe size")->capture_default_str();
  app.add_flag("--opaque", o.opaque, "Add the opaque probe");
  app.add_option("--style", o.style, "cbn or cbv")->capture_default_str();
  app.add_option("--stage", o.stage, "Number of free variables")->capture_default_str();
  app.add_option("--max-set", o.max_set, "Largest finite set for lawcheck")->capture_default_str();
  app.add_option("--seed", o.seed, "Random seed")->envname("HOGSOS_SEED")->capture_default_str();
  app.add_option("--threads", o.threads, "Worker threads")->capture_default_str();
  app.add_option("--contexts", o.contexts, "Contexts per pair")->capture_default_str();
  app.add_option("--context-size", o.context_size, "Maximal context size")->capture_default_str();
  app.add_flag("--mutant", o.mutant, "lawcheck the label-inspecting mutant law instead");

  std::string spec, a, b;
  std::vector<std::pair<std::string, std::string>> pairs;

  auto* run = app.add_subcommand("run", "Trace a term");
  run->add_option("spec", spec, "Spec file or builtin id")->required();
  run->add_option("term", a)->required();
  auto* step = app.add_subcommand("step", "One-step behaviour of a term");
  step->add_option("spec", spec)->required();
  step->add_option("term", a)->required();
  auto* bis = app.add_subcommand("bisim", "Bounded bisimilarity of two closed terms");
  bis->add_option("spec", spec)->required();
  bis->add_option("t1", a)->required();
  bis->add_option("t2", b)->required();
  auto* app_b = app.add_subcommand("appbisim", "Strong applicative bisimilarity of lambda terms");
  app_b->add_option("t1", a)->required();
  app_b->add_option("t2", b)->required();
  auto* law = app.add_subcommand("lawcheck", "Exhaustive naturality checks on finite sets");
  law->add_option("spec", spec)->required();
  auto* cong = app.add_subcommand("congruence", "Plug bisimilar pairs into random contexts");
  cong->add_option("instance", spec)->required();
  cong->add_option("--pair", pairs, "Two terms; repeatable");
  auto* inst = app.add_subcommand("instances", "List the builtin instances");
  auto* val = app.add_subcommand("validate", "Check a spec file");
  val->add_option("spec", spec)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailure;
  }

  // HOGSOS_SEED ranks above the config file and below the flag.
  if (const char* env = std::getenv("HOGSOS_SEED"); env && app.get_option("--seed")->count() > 0) {
    bool flag = false;
    for (int i = 1; i < argc; ++i) {
      const std::string_view arg = argv[i];
      flag = flag || arg == "--seed" || arg.rfind("--seed=", 0) == 0;
    }
    if (!flag) {
      try {
        o.seed = std::stoull(env);
      } catch (const std::exception&) {
        std::cerr << "hogsos: HOGSOS_SEED is not a number\n";
        return kFailure;
      }
    }
  }

  try {
    if (*run) return cmd_run(o, spec, a);
    if (*step) return cmd_step(o, spec, a);
    if (*bis) return cmd_bisim(o, spec, a, b);
    if (*app_b) return cmd_appbisim(o, a, b);
    if (*law) return cmd_lawcheck(o, spec);
    if (*cong) return cmd_congruence(o, spec, pairs);
    if (*inst) return cmd_instances(o);
    if (*val) return cmd_validate(o, spec);
  } catch (const ParseError& e) {
    std::cerr << "hogsos: parse error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "hogsos: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
