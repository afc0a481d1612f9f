#pragma once
// Executable contextual predicates: grammar, parser, canonical printer and a
// sandboxed evaluator. A predicate is a boolean expression over exactly one
// proposed action and one observation; true means "risk detected". The
// grammar and canonical printed form are documented in
// docs/predicate-grammar.md and are the on-disk predicate format.

#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "guardrail/core.hpp"

namespace guardrail::dsl {

inline constexpr int kMaxDepth = 32;
inline constexpr size_t kMaxSourceLength = 4096;

enum class NodeKind {
  literal,
  accessor,
  compare,
  membership,
  logical_not,
  logical_and,
  logical_or,
};

// The complete accessor set; evaluation can touch nothing outside these.
enum class AccessorKind {
  action_name,
  action_target,
  held_object,
  location,
  object_state,
  object_material,
  object_contains,
  object_exists,
};

enum class CompareOp { eq, ne, lt, le, gt, ge };

// Static value types; `dynamic` covers obs.object(..).state(..) whose payload
// is bool-or-scalar by data.
enum class ValueType { boolean, number, string, dynamic };

using LiteralValue = std::variant<bool, double, std::string>;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  NodeKind kind = NodeKind::literal;
  ValueType type = ValueType::boolean;

  LiteralValue value;                // literal
  AccessorKind accessor = AccessorKind::action_name;
  std::string object_name;           // object_* accessor argument
  std::string key;                   // state/material key or contained-object name

  CompareOp op = CompareOp::eq;      // compare
  bool negated = false;              // membership: "not in"
  std::vector<LiteralValue> items;   // membership list, order preserved verbatim

  ExprPtr lhs;                       // also the operand of logical_not
  ExprPtr rhs;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line(line),
        column(column) {}
  int line;
  int column;
};

enum class EvalErrorKind { missing_object, missing_state, missing_material, type_mismatch };

std::string to_string(EvalErrorKind k);

struct EvalError : std::runtime_error {
  EvalError(EvalErrorKind kind, const std::string& accessor)
      : std::runtime_error(to_string(kind) + ":" + accessor), kind(kind), accessor(accessor) {}
  EvalErrorKind kind;
  std::string accessor;  // printed form of the failing accessor or operator
};

struct EvalContext {
  const ActionProposal* action = nullptr;
  const Observation* observation = nullptr;
};

// Parses source into a typed AST. Throws ParseError with position info on
// syntax errors, unknown accessors, type-rule violations and depth > 32.
ExprPtr parse_predicate(std::string_view source);

// Canonical text; every compound node fully parenthesized, strings
// single-quoted. parse_predicate(print_predicate(e)) is structurally equal
// to e for every valid AST.
std::string print_predicate(const Expr& expr);

// Pure, total over valid contexts. Missing referents and type mismatches
// throw EvalError (never a silent false). String comparison is
// case-insensitive. No short-circuiting: both operands of a connective are
// always evaluated so broken subtrees cannot hide behind a decided result.
bool evaluate_predicate(const Expr& expr, const EvalContext& ctx);
bool evaluate_predicate(const Expr& expr, const ActionProposal& action, const Observation& obs);

bool structurally_equal(const Expr& a, const Expr& b);

int depth(const Expr& expr);
int node_count(const Expr& expr);

// Tokens a predicate touches: accessor object names and keys plus string
// literals (lowercased). The harness uses this for reason/tag matching.
std::set<std::string> referenced_tokens(const Expr& expr);

}  // namespace guardrail::dsl
