#include "dthread/verify/behavior.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>

#include "dthread/core/error.hpp"

namespace dthread::verify {

struct IntExpr::Node {
  enum Kind { kConst, kVar, kNeg, kNot, kBinary } kind = kConst;
  std::int64_t value = 0;
  std::size_t var = 0;
  std::string op;
  std::shared_ptr<const Node> l, r;
};

namespace {

using NodePtr = std::shared_ptr<const IntExpr::Node>;

class ExprParser {
 public:
  ExprParser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = binary(0);
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(text_.substr(pos_, 1)) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::kSyntax, "'" + std::string(text_) + "' column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view s) {
    skip();
    if (text_.substr(pos_, s.size()) != s) return false;
    // keep "<" from eating the first half of "<="
    if ((s == "<" || s == ">" || s == "!") && text_.substr(pos_ + 1, 1) == "=") return false;
    pos_ += s.size();
    return true;
  }

  NodePtr binary(int level) {
    static const std::vector<std::vector<std::string_view>> levels = {
        {"||"}, {"&&"}, {"==", "!="}, {"<=", ">=", "<", ">"}, {"+", "-"}, {"*", "/", "%"}};
    if (level == static_cast<int>(levels.size())) return unary();
    NodePtr l = binary(level + 1);
    for (;;) {
      bool matched = false;
      for (auto op : levels[static_cast<std::size_t>(level)]) {
        if (accept(op)) {
          auto n = std::make_shared<IntExpr::Node>();
          n->kind = IntExpr::Node::kBinary;
          n->op = std::string(op);
          n->l = l;
          n->r = binary(level + 1);
          l = n;
          matched = true;
          break;
        }
      }
      if (!matched) return l;
    }
  }

  NodePtr unary() {
    if (accept("-")) {
      auto n = std::make_shared<IntExpr::Node>();
      n->kind = IntExpr::Node::kNeg;
      n->l = unary();
      return n;
    }
    if (accept("!")) {
      auto n = std::make_shared<IntExpr::Node>();
      n->kind = IntExpr::Node::kNot;
      n->l = unary();
      return n;
    }
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    if (accept("(")) {
      NodePtr n = binary(0);
      if (!accept(")")) fail("expected ')'");
      return n;
    }
    auto n = std::make_shared<IntExpr::Node>();
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, text_[pos_] - '0', &v)) {
          fail("integer literal too large");
        }
        ++pos_;
      }
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name(text_.substr(start, pos_ - start));
      if (name == "true" || name == "false") {
        n->value = name == "true";
        return n;
      }
      auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) {
        throw Error(Errc::kUnresolvedReference, "'" + std::string(text_) + "': unknown variable '" + name + "'");
      }
      n->kind = IntExpr::Node::kVar;
      n->var = static_cast<std::size_t>(it - vars_.begin());
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

std::int64_t eval_node(const IntExpr::Node& n, std::span<const std::int64_t> values) {
  using K = IntExpr::Node;
  switch (n.kind) {
    case K::kConst: return n.value;
    case K::kVar: return values[n.var];
    case K::kNeg: {
      std::int64_t out;
      if (__builtin_sub_overflow(std::int64_t{0}, eval_node(*n.l, values), &out)) throw Error(Errc::kOverflow, "overflow");
      return out;
    }
    case K::kNot: return eval_node(*n.l, values) == 0;
    case K::kBinary: break;
  }
  const std::string& op = n.op;
  const std::int64_t a = eval_node(*n.l, values);
  if (op == "&&") return a != 0 && eval_node(*n.r, values) != 0;
  if (op == "||") return a != 0 || eval_node(*n.r, values) != 0;
  const std::int64_t b = eval_node(*n.r, values);
  std::int64_t out = 0;
  bool overflow = false;
  if (op == "+") {
    overflow = __builtin_add_overflow(a, b, &out);
  } else if (op == "-") {
    overflow = __builtin_sub_overflow(a, b, &out);
  } else if (op == "*") {
    overflow = __builtin_mul_overflow(a, b, &out);
  } else if (op == "/" || op == "%") {
    if (b == 0) throw Error(Errc::kInvalidArgument, "division by zero");
    if (a == INT64_MIN && b == -1) throw Error(Errc::kOverflow, "overflow");
    out = op == "/" ? a / b : a % b;
  } else if (op == "==") {
    out = a == b;
  } else if (op == "!=") {
    out = a != b;
  } else if (op == "<") {
    out = a < b;
  } else if (op == "<=") {
    out = a <= b;
  } else if (op == ">") {
    out = a > b;
  } else if (op == ">=") {
    out = a >= b;
  }
  if (overflow) throw Error(Errc::kOverflow, "integer overflow");
  return out;
}

struct CompiledTransition {
  std::size_t from = 0;
  std::size_t to = 0;
  std::optional<IntExpr> guard;
  std::vector<std::pair<std::size_t, IntExpr>> assigns;
};

struct CompiledInvariant {
  std::optional<std::size_t> state;  // nullopt: every state
  IntExpr expr;
  std::string label;
};

struct Compiled {
  std::vector<std::string> variables;
  std::vector<std::int64_t> lo, hi, initial;
  std::size_t initial_state = 0;
  std::set<std::size_t> finals;
  std::vector<CompiledTransition> transitions;
  std::vector<CompiledInvariant> invariants;
};

std::size_t state_index(const core::StateMachineDef& m, const std::string& name, const std::string& where) {
  auto it = std::find(m.states.begin(), m.states.end(), name);
  if (it == m.states.end()) throw Error(Errc::kUnresolvedReference, where + " names unknown state '" + name + "'");
  return static_cast<std::size_t>(it - m.states.begin());
}

Compiled compile(const core::StateMachineDef& m) {
  Compiled c;
  if (m.states.empty()) throw Error(Errc::kInvalidArgument, "machine declares no states");
  std::set<std::string> seen;
  for (const auto& s : m.states) {
    if (!seen.insert(s).second) throw Error(Errc::kDuplicateName, "state '" + s + "' is declared twice");
  }
  c.initial_state = state_index(m, m.initial, "initial");
  for (const auto& f : m.final_states) c.finals.insert(state_index(m, f, "final_states"));
  for (const auto& v : m.variables) {
    if (std::find(c.variables.begin(), c.variables.end(), v.name) != c.variables.end()) {
      throw Error(Errc::kDuplicateName, "variable '" + v.name + "' is declared twice");
    }
    if (v.min > v.max || v.initial < v.min || v.initial > v.max) {
      throw Error(Errc::kInvalidArgument, "variable '" + v.name + "' has an empty range or an initial value outside it");
    }
    c.variables.push_back(v.name);
    c.lo.push_back(v.min);
    c.hi.push_back(v.max);
    c.initial.push_back(v.initial);
  }
  for (std::size_t i = 0; i < m.transitions.size(); ++i) {
    const auto& t = m.transitions[i];
    const std::string where = "transition " + std::to_string(i);
    CompiledTransition ct;
    ct.from = state_index(m, t.from, where);
    ct.to = state_index(m, t.to, where);
    if (!t.guard.empty()) ct.guard = IntExpr::compile(t.guard, c.variables);
    for (const auto& a : t.assigns) {
      auto it = std::find(c.variables.begin(), c.variables.end(), a.variable);
      if (it == c.variables.end()) {
        throw Error(Errc::kUnresolvedReference, where + " assigns unknown variable '" + a.variable + "'");
      }
      ct.assigns.emplace_back(static_cast<std::size_t>(it - c.variables.begin()), IntExpr::compile(a.expr, c.variables));
    }
    c.transitions.push_back(std::move(ct));
  }
  for (const auto& inv : m.invariants) {
    CompiledInvariant ci{std::nullopt, IntExpr::compile(inv.expr, c.variables), inv.state + ": " + inv.expr};
    if (inv.state != "*") ci.state = state_index(m, inv.state, "invariant");
    c.invariants.push_back(std::move(ci));
  }
  return c;
}

using Key = std::vector<std::int64_t>;  // state index, then values

struct Visit {
  std::optional<Key> parent;
  std::size_t transition = 0;
  std::size_t depth = 0;
};

// nullopt: disabled
std::optional<Key> fire(const Compiled& c, const CompiledTransition& t, const Key& from) {
  std::span<const std::int64_t> values(from.data() + 1, from.size() - 1);
  if (t.guard && t.guard->eval(values) == 0) return std::nullopt;
  Key next = from;
  next[0] = static_cast<std::int64_t>(t.to);
  for (const auto& [var, expr] : t.assigns) {
    const std::int64_t v = expr.eval(values);
    if (v < c.lo[var] || v > c.hi[var]) return std::nullopt;
    next[var + 1] = v;
  }
  return next;
}

nlohmann::ordered_json config_json(const core::StateMachineDef& m, const Compiled& c, const Key& k) {
  nlohmann::ordered_json vars = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < c.variables.size(); ++i) vars[c.variables[i]] = k[i + 1];
  nlohmann::ordered_json j;
  j["state"] = m.states[static_cast<std::size_t>(k[0])];
  j["vars"] = vars;
  return j;
}

nlohmann::ordered_json trace_json(const core::StateMachineDef& m, const Compiled& c, const std::map<Key, Visit>& seen,
                                  const Key& end) {
  std::vector<Key> path{end};
  while (seen.at(path.back()).parent) path.push_back(*seen.at(path.back()).parent);
  std::reverse(path.begin(), path.end());
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < path.size(); ++i) {
    nlohmann::ordered_json step;
    step["step"] = i;
    if (i == 0) {
      step["event"] = nullptr;
      step["transition"] = nullptr;
    } else {
      const std::size_t t = seen.at(path[i]).transition;
      step["event"] = m.transitions[t].event;
      step["transition"] = t;
    }
    auto cfg = config_json(m, c, path[i]);
    step["state"] = cfg["state"];
    step["vars"] = cfg["vars"];
    steps.push_back(std::move(step));
  }
  return steps;
}

std::string describe(const core::StateMachineDef& m, const Compiled& c, const Key& k) {
  std::string out = m.states[static_cast<std::size_t>(k[0])];
  if (c.variables.empty()) return out;
  out += " with ";
  for (std::size_t i = 0; i < c.variables.size(); ++i) {
    if (i) out += ", ";
    out += c.variables[i] + "=" + std::to_string(k[i + 1]);
  }
  return out;
}

}  // namespace

IntExpr IntExpr::compile(std::string_view text, const std::vector<std::string>& variables) {
  IntExpr e;
  e.text_ = std::string(text);
  e.root_ = ExprParser(text, variables).parse();
  return e;
}

std::int64_t IntExpr::eval(std::span<const std::int64_t> values) const { return eval_node(*root_, values); }

std::vector<Finding> check_state_machine(const core::StateMachineDef& m, const BehaviorOptions& options) {
  std::vector<Finding> out;
  auto finding = [&](Severity severity, std::string rule, std::string message) -> Finding& {
    Finding f;
    f.phase = Phase::kPhase2Behavior;
    f.severity = severity;
    f.rule = std::move(rule);
    f.subjects = {m.uid};
    if (m.owner != m.uid && !m.owner.ns.empty()) f.subjects.push_back(m.owner);
    f.message = m.name + ": " + std::move(message);
    f.evidence["machine"] = m.name;
    out.push_back(std::move(f));
    return out.back();
  };

  Compiled c;
  try {
    c = compile(m);
  } catch (const Error& e) {
    finding(Severity::kError, "behavior.invalid-machine", e.what());
    return out;
  }

  std::map<Key, Visit> seen;
  std::deque<Key> queue;
  Key start{static_cast<std::int64_t>(c.initial_state)};
  start.insert(start.end(), c.initial.begin(), c.initial.end());
  seen.emplace(start, Visit{});
  queue.push_back(start);

  std::vector<bool> invariant_reported(c.invariants.size(), false);
  std::set<std::size_t> deadlocked_states;
  std::set<std::size_t> reached{c.initial_state};
  bool truncated = false;
  bool capped = false;
  std::set<std::string> evaluation_errors;

  while (!queue.empty()) {
    const Key k = queue.front();
    queue.pop_front();
    const std::size_t state = static_cast<std::size_t>(k[0]);
    const std::size_t depth = seen.at(k).depth;
    std::span<const std::int64_t> values(k.data() + 1, k.size() - 1);

    for (std::size_t i = 0; i < c.invariants.size(); ++i) {
      const auto& inv = c.invariants[i];
      if (invariant_reported[i] || (inv.state && *inv.state != state)) continue;
      bool holds = true;
      try {
        holds = inv.expr.eval(values) != 0;
      } catch (const Error& e) {
        holds = false;
      }
      if (holds) continue;
      invariant_reported[i] = true;
      auto& f = finding(Severity::kError, "behavior.invariant",
                        "invariant '" + inv.label + "' fails in " + describe(m, c, k) + " after " +
                            std::to_string(depth) + " step(s)");
      f.evidence["invariant"] = inv.label;
      f.evidence["configuration"] = config_json(m, c, k);
      f.evidence["trace"] = trace_json(m, c, seen, k);
    }

    bool enabled = false;
    for (std::size_t t = 0; t < c.transitions.size(); ++t) {
      if (c.transitions[t].from != state) continue;
      std::optional<Key> next;
      try {
        next = fire(c, c.transitions[t], k);
      } catch (const Error& e) {
        if (evaluation_errors.insert("transition " + std::to_string(t)).second) {
          auto& f = finding(Severity::kError, "behavior.evaluation",
                            "transition " + std::to_string(t) + " (" + m.transitions[t].event + ") fails in " +
                                describe(m, c, k) + ": " + e.what());
          f.evidence["trace"] = trace_json(m, c, seen, k);
        }
        continue;
      }
      if (!next) continue;
      enabled = true;
      if (seen.contains(*next)) continue;
      if (depth >= options.depth_bound) {
        truncated = true;
        continue;
      }
      if (seen.size() >= options.state_cap) {
        capped = true;
        continue;
      }
      seen.emplace(*next, Visit{k, t, depth + 1});
      reached.insert(static_cast<std::size_t>((*next)[0]));
      queue.push_back(*next);
    }
    if (!enabled && !c.finals.contains(state) && deadlocked_states.insert(state).second) {
      auto& f = finding(Severity::kWarning, "behavior.deadlock",
                        "no transition is enabled in " + describe(m, c, k) + " and it is not a final state");
      f.evidence["configuration"] = config_json(m, c, k);
      f.evidence["trace"] = trace_json(m, c, seen, k);
    }
  }

  if (capped) {
    auto& f = finding(Severity::kWarning, "behavior.state-cap",
                      "exploration stopped at " + std::to_string(options.state_cap) +
                          " configurations; results are partial");
    f.evidence["explored"] = seen.size();
  } else if (truncated) {
    auto& f = finding(Severity::kInfo, "behavior.depth-bound",
                      "exploration stopped at depth " + std::to_string(options.depth_bound) + "; results are partial");
    f.evidence["explored"] = seen.size();
  } else {
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      if (reached.contains(s)) continue;
      auto& f = finding(Severity::kWarning, "behavior.unreachable", "state '" + m.states[s] + "' is unreachable");
      f.evidence["state"] = m.states[s];
    }
  }
  sort_findings(out);
  return out;
}

std::optional<Configuration> replay_trace(const core::StateMachineDef& m, const nlohmann::ordered_json& trace) {
  Compiled c;
  try {
    c = compile(m);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!trace.is_array() || trace.empty()) return std::nullopt;
  auto matches = [&](const Key& k, const nlohmann::ordered_json& step) {
    if (step.at("state") != m.states[static_cast<std::size_t>(k[0])]) return false;
    for (std::size_t i = 0; i < c.variables.size(); ++i) {
      if (step.at("vars").at(c.variables[i]) != k[i + 1]) return false;
    }
    return true;
  };
  try {
    Key k{static_cast<std::int64_t>(c.initial_state)};
    k.insert(k.end(), c.initial.begin(), c.initial.end());
    if (!matches(k, trace[0])) return std::nullopt;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      const std::size_t t = trace[i].at("transition").get<std::size_t>();
      if (t >= c.transitions.size() || c.transitions[t].from != static_cast<std::size_t>(k[0]) ||
          m.transitions[t].event != trace[i].at("event")) {
        return std::nullopt;
      }
      auto next = fire(c, c.transitions[t], k);
      if (!next || !matches(*next, trace[i])) return std::nullopt;
      k = *next;
    }
    return Configuration{m.states[static_cast<std::size_t>(k[0])], Key(k.begin() + 1, k.end())};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace dthread::verify
