#pragma once

// Shipped instances: unary SKI, unary SKI with choice, and the call-by-name
// and call-by-value lambda calculi.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hogsos/engine.hpp"
#include "hogsos/lambda.hpp"

namespace hogsos {

struct KnownPair {
  std::string left, right;
  std::string note;
};

// A trace from `start`; when `probe` is set, the final function is applied to
// it and the trace of the result is `continuation`.
struct GoldenTrace {
  std::string start;
  std::vector<std::string> terms;
  std::string terminal;  // "fun" | "stuck" | "budget"
  std::optional<std::string> probe;
  std::vector<std::string> continuation;
  std::string continuation_terminal;
  std::size_t max_steps = 10;
};

struct InstanceBundle {
  enum class Kind : std::uint8_t { FirstOrder, Lambda };

  std::string id;
  Kind kind = Kind::FirstOrder;
  std::string doc;

  // FirstOrder
  std::string spec_text;
  std::shared_ptr<const HOSpec> spec;
  std::shared_ptr<const Engine> engine;

  // Lambda
  std::optional<lambda::Style> style;
  std::function<lambda::LamBehavior(const lambda::LamTerm&)> step;

  std::vector<GoldenTrace> golden;
  std::vector<KnownPair> equivalent;
  std::vector<KnownPair> inequivalent;
  std::size_t depth = 8;
  std::size_t probe_size = 3;
};

std::vector<std::string> builtin_ids();
// Throws Error on an unknown id.
const InstanceBundle& builtin(std::string_view id);
// The spec text of a first-order builtin, identical to data/<id>.spec.
std::string_view builtin_spec_text(std::string_view id);

}  // namespace hogsos
