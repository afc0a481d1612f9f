#include "guardrail/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace guardrail::dsl {

std::string to_string(EvalErrorKind k) {
  switch (k) {
    case EvalErrorKind::missing_object: return "missing-object";
    case EvalErrorKind::missing_state: return "missing-state";
    case EvalErrorKind::missing_material: return "missing-material";
    case EvalErrorKind::type_mismatch: return "type-mismatch";
  }
  return "type-mismatch";
}

namespace {

enum class TokKind {
  identifier,   // also keywords: and or not in true false
  string_lit,
  number_lit,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  dot,
  op_eq,
  op_ne,
  op_lt,
  op_le,
  op_gt,
  op_ge,
  end,
};

struct Token {
  TokKind kind = TokKind::end;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> tokenize() {
    std::vector<Token> out;
    while (true) {
      skip_whitespace();
      Token t = next_token();
      bool done = t.kind == TokKind::end;
      out.push_back(std::move(t));
      if (done) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, column_); }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char peek2() const { return pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0'; }

  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    return c;
  }

  void skip_whitespace() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  Token make(TokKind kind, std::string text, int line, int col) {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.line = line;
    t.column = col;
    return t;
  }

  Token next_token() {
    int line = line_, col = column_;
    if (pos_ >= src_.size()) return make(TokKind::end, "", line, col);
    char c = peek();

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
        word.push_back(advance());
      }
      return make(TokKind::identifier, std::move(word), line, col);
    }

    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(peek2())))) {
      return lex_number(line, col);
    }

    if (c == '\'' || c == '"') return lex_string(line, col);

    advance();
    switch (c) {
      case '(': return make(TokKind::lparen, "(", line, col);
      case ')': return make(TokKind::rparen, ")", line, col);
      case '[': return make(TokKind::lbracket, "[", line, col);
      case ']': return make(TokKind::rbracket, "]", line, col);
      case ',': return make(TokKind::comma, ",", line, col);
      case '.': return make(TokKind::dot, ".", line, col);
      case '=':
        if (peek() == '=') {
          advance();
          return make(TokKind::op_eq, "==", line, col);
        }
        fail("expected '==' (single '=' is not an operator)");
      case '!':
        if (peek() == '=') {
          advance();
          return make(TokKind::op_ne, "!=", line, col);
        }
        fail("expected '!='");
      case '<':
        if (peek() == '=') {
          advance();
          return make(TokKind::op_le, "<=", line, col);
        }
        return make(TokKind::op_lt, "<", line, col);
      case '>':
        if (peek() == '=') {
          advance();
          return make(TokKind::op_ge, ">=", line, col);
        }
        return make(TokKind::op_gt, ">", line, col);
      default:
        fail(std::string("unexpected character '") + c + "'");
    }
  }

  Token lex_number(int line, int col) {
    std::string text;
    if (peek() == '-') text.push_back(advance());
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
      text.push_back(advance());
    }
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek2()))) {
      text.push_back(advance());
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
        text.push_back(advance());
      }
    }
    if (peek() == 'e' || peek() == 'E') {
      std::string exp;
      exp.push_back('e');
      size_t save_pos = pos_;
      int save_line = line_, save_col = column_;
      advance();
      if (peek() == '+' || peek() == '-') exp.push_back(advance());
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(peek()))) {
          exp.push_back(advance());
        }
        text += exp;
      } else {
        pos_ = save_pos;
        line_ = save_line;
        column_ = save_col;
      }
    }
    Token t = make(TokKind::number_lit, text, line, col);
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), t.number);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw ParseError("malformed number '" + text + "'", line, col);
    }
    return t;
  }

  Token lex_string(int line, int col) {
    char quote = advance();
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) throw ParseError("unterminated string literal", line, col);
      char c = advance();
      if (c == quote) break;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw ParseError("unterminated escape", line_, column_);
        char esc = advance();
        switch (esc) {
          case '\\': value.push_back('\\'); break;
          case '\'': value.push_back('\''); break;
          case '"': value.push_back('"'); break;
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          default:
            throw ParseError(std::string("unknown escape '\\") + esc + "'", line_, column_);
        }
      } else {
        value.push_back(c);
      }
    }
    return make(TokKind::string_lit, std::move(value), line, col);
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

bool is_keyword(const Token& t, std::string_view word) {
  return t.kind == TokKind::identifier && t.text == word;
}

ValueType literal_type(const LiteralValue& v) {
  if (std::holds_alternative<bool>(v)) return ValueType::boolean;
  if (std::holds_alternative<double>(v)) return ValueType::number;
  return ValueType::string;
}

bool types_compatible(ValueType a, ValueType b) {
  return a == ValueType::dynamic || b == ValueType::dynamic || a == b;
}

// Recursive descent, precedence or < and < not < comparison/membership.
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ExprPtr parse() {
    ExprPtr e = parse_or(1);
    expect(TokKind::end, "trailing input after expression");
    if (e->type != ValueType::boolean && e->type != ValueType::dynamic) {
      throw ParseError("predicate must be boolean-valued", 1, 1);
    }
    return e;
  }

 private:
  const Token& cur() const { return tokens_[idx_]; }
  const Token& next() { return tokens_[idx_++]; }

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, cur().line, cur().column);
  }

  void expect(TokKind kind, const std::string& msg) {
    if (cur().kind != kind) fail(msg);
    ++idx_;
  }

  void check_depth(int d) {
    if (d > kMaxDepth) throw ParseError("expression depth exceeds 32", cur().line, cur().column);
  }

  void require_boolean(const ExprPtr& e, const char* what) {
    if (!types_compatible(e->type, ValueType::boolean)) {
      fail(std::string(what) + " requires boolean operands");
    }
  }

  ExprPtr parse_or(int d) {
    check_depth(d);
    ExprPtr lhs = parse_and(d + 1);
    while (is_keyword(cur(), "or")) {
      require_boolean(lhs, "'or'");
      next();
      ExprPtr rhs = parse_and(d + 1);
      require_boolean(rhs, "'or'");
      auto node = std::make_shared<Expr>();
      node->kind = NodeKind::logical_or;
      node->type = ValueType::boolean;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
      check_depth(depth(*lhs));
    }
    return lhs;
  }

  ExprPtr parse_and(int d) {
    check_depth(d);
    ExprPtr lhs = parse_not(d + 1);
    while (is_keyword(cur(), "and")) {
      require_boolean(lhs, "'and'");
      next();
      ExprPtr rhs = parse_not(d + 1);
      require_boolean(rhs, "'and'");
      auto node = std::make_shared<Expr>();
      node->kind = NodeKind::logical_and;
      node->type = ValueType::boolean;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      lhs = std::move(node);
      check_depth(depth(*lhs));
    }
    return lhs;
  }

  ExprPtr parse_not(int d) {
    check_depth(d);
    if (is_keyword(cur(), "not")) {
      next();
      ExprPtr operand = parse_not(d + 1);
      require_boolean(operand, "'not'");
      auto node = std::make_shared<Expr>();
      node->kind = NodeKind::logical_not;
      node->type = ValueType::boolean;
      node->lhs = std::move(operand);
      return node;
    }
    return parse_comparison(d);
  }

  ExprPtr parse_comparison(int d) {
    check_depth(d);
    ExprPtr lhs = parse_operand(d + 1);

    CompareOp op;
    bool has_op = true;
    switch (cur().kind) {
      case TokKind::op_eq: op = CompareOp::eq; break;
      case TokKind::op_ne: op = CompareOp::ne; break;
      case TokKind::op_lt: op = CompareOp::lt; break;
      case TokKind::op_le: op = CompareOp::le; break;
      case TokKind::op_gt: op = CompareOp::gt; break;
      case TokKind::op_ge: op = CompareOp::ge; break;
      default: has_op = false; break;
    }
    if (has_op) {
      next();
      ExprPtr rhs = parse_operand(d + 1);
      if (!types_compatible(lhs->type, rhs->type)) {
        fail("comparison between unlike types");
      }
      if (op != CompareOp::eq && op != CompareOp::ne) {
        if (!types_compatible(lhs->type, ValueType::number) ||
            !types_compatible(rhs->type, ValueType::number)) {
          fail("ordering comparison requires numeric operands");
        }
      }
      auto node = std::make_shared<Expr>();
      node->kind = NodeKind::compare;
      node->type = ValueType::boolean;
      node->op = op;
      node->lhs = std::move(lhs);
      node->rhs = std::move(rhs);
      return node;
    }

    bool negated = false;
    if (is_keyword(cur(), "not") && idx_ + 1 < tokens_.size() &&
        is_keyword(tokens_[idx_ + 1], "in")) {
      next();
      negated = true;
    }
    if (is_keyword(cur(), "in")) {
      next();
      if (lhs->type == ValueType::boolean) fail("membership left side must be string or number");
      auto node = std::make_shared<Expr>();
      node->kind = NodeKind::membership;
      node->type = ValueType::boolean;
      node->negated = negated;
      node->items = parse_list(lhs->type);
      node->lhs = std::move(lhs);
      return node;
    }
    if (negated) fail("expected 'in' after 'not'");
    return lhs;
  }

  std::vector<LiteralValue> parse_list(ValueType lhs_type) {
    expect(TokKind::lbracket, "expected '[' to open membership list");
    std::vector<LiteralValue> items;
    if (cur().kind != TokKind::rbracket) {
      while (true) {
        LiteralValue item = parse_literal_value("membership list");
        ValueType t = literal_type(item);
        if (t == ValueType::boolean) fail("membership list items must be strings or numbers");
        if (!items.empty() && literal_type(items.front()) != t) {
          fail("membership list items must share one type");
        }
        if (!types_compatible(lhs_type, t)) fail("membership list type differs from left side");
        items.push_back(std::move(item));
        if (cur().kind == TokKind::comma) {
          next();
          continue;
        }
        break;
      }
    }
    expect(TokKind::rbracket, "expected ']' to close membership list");
    return items;
  }

  LiteralValue parse_literal_value(const char* where) {
    if (cur().kind == TokKind::string_lit) return LiteralValue(next().text);
    if (cur().kind == TokKind::number_lit) return LiteralValue(next().number);
    if (is_keyword(cur(), "true")) {
      next();
      return LiteralValue(true);
    }
    if (is_keyword(cur(), "false")) {
      next();
      return LiteralValue(false);
    }
    fail(std::string("expected literal in ") + where);
  }

  ExprPtr parse_operand(int d) {
    check_depth(d);
    const Token& t = cur();
    switch (t.kind) {
      case TokKind::lparen: {
        next();
        ExprPtr inner = parse_or(d + 1);
        expect(TokKind::rparen, "expected ')'");
        return inner;
      }
      case TokKind::string_lit:
      case TokKind::number_lit:
        return make_literal(parse_literal_value("expression"));
      case TokKind::identifier:
        if (t.text == "true" || t.text == "false") {
          return make_literal(parse_literal_value("expression"));
        }
        if (t.text == "action" || t.text == "obs") return parse_accessor();
        if (t.text == "and" || t.text == "or" || t.text == "in" || t.text == "not") {
          fail("expected operand, found keyword '" + t.text + "'");
        }
        fail("unknown accessor '" + t.text + "' (accessors start with action. or obs.)");
      case TokKind::lbracket:
        fail("list literal is only allowed on the right side of 'in'");
      default:
        fail("expected operand");
    }
  }

  ExprPtr make_literal(LiteralValue v) {
    auto node = std::make_shared<Expr>();
    node->kind = NodeKind::literal;
    node->type = literal_type(v);
    node->value = std::move(v);
    return node;
  }

  std::string expect_identifier(const std::string& what) {
    if (cur().kind != TokKind::identifier) fail("expected " + what);
    return next().text;
  }

  std::string expect_string_argument(const std::string& what) {
    expect(TokKind::lparen, "expected '(' after " + what);
    if (cur().kind != TokKind::string_lit) fail("expected string argument to " + what);
    std::string arg = next().text;
    expect(TokKind::rparen, "expected ')' after " + what + " argument");
    return arg;
  }

  ExprPtr parse_accessor() {
    std::string root = next().text;  // "action" or "obs"
    expect(TokKind::dot, "expected '.' after '" + root + "'");
    std::string field = expect_identifier("accessor field");

    auto node = std::make_shared<Expr>();
    node->kind = NodeKind::accessor;

    if (root == "action") {
      if (field == "name") {
        node->accessor = AccessorKind::action_name;
      } else if (field == "target") {
        node->accessor = AccessorKind::action_target;
      } else {
        fail("unknown accessor 'action." + field + "'");
      }
      node->type = ValueType::string;
      return node;
    }

    if (field == "held_object") {
      node->accessor = AccessorKind::held_object;
      node->type = ValueType::string;
      return node;
    }
    if (field == "location") {
      node->accessor = AccessorKind::location;
      node->type = ValueType::string;
      return node;
    }
    if (field == "exists") {
      node->accessor = AccessorKind::object_exists;
      node->type = ValueType::boolean;
      node->object_name = expect_string_argument("obs.exists");
      return node;
    }
    if (field != "object") fail("unknown accessor 'obs." + field + "'");

    node->object_name = expect_string_argument("obs.object");
    expect(TokKind::dot, "expected '.' after obs.object(...)");
    std::string sub = expect_identifier("object accessor");
    if (sub == "state") {
      node->accessor = AccessorKind::object_state;
      node->type = ValueType::dynamic;
      node->key = expect_string_argument("state");
    } else if (sub == "material") {
      node->accessor = AccessorKind::object_material;
      node->type = ValueType::boolean;
      node->key = expect_string_argument("material");
    } else if (sub == "contains") {
      node->accessor = AccessorKind::object_contains;
      node->type = ValueType::boolean;
      node->key = expect_string_argument("contains");
    } else {
      fail("unknown accessor 'obs.object(..)." + sub + "'");
    }
    return node;
  }

  std::vector<Token> tokens_;
  size_t idx_ = 0;
};

std::string quote_string(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string literal_text(const LiteralValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
  if (std::holds_alternative<double>(v)) return format_number(std::get<double>(v));
  return quote_string(std::get<std::string>(v));
}

std::string compare_op_text(CompareOp op) {
  switch (op) {
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
  }
  return "==";
}

std::string accessor_text(const Expr& e) {
  switch (e.accessor) {
    case AccessorKind::action_name: return "action.name";
    case AccessorKind::action_target: return "action.target";
    case AccessorKind::held_object: return "obs.held_object";
    case AccessorKind::location: return "obs.location";
    case AccessorKind::object_state:
      return "obs.object(" + quote_string(e.object_name) + ").state(" + quote_string(e.key) + ")";
    case AccessorKind::object_material:
      return "obs.object(" + quote_string(e.object_name) + ").material(" + quote_string(e.key) +
             ")";
    case AccessorKind::object_contains:
      return "obs.object(" + quote_string(e.object_name) + ").contains(" + quote_string(e.key) +
             ")";
    case AccessorKind::object_exists:
      return "obs.exists(" + quote_string(e.object_name) + ")";
  }
  return "action.name";
}

// Runtime value produced by evaluating a literal or accessor.
using RuntimeValue = std::variant<bool, double, std::string>;

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

RuntimeValue from_literal(const LiteralValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

const SceneObject& resolve_object(const Expr& e, const Observation& obs) {
  // Smallest instance_id among name matches keeps lookups deterministic even
  // if the observation's object list order varies.
  const SceneObject* best = nullptr;
  for (const auto& obj : obs.objects) {
    if (obj.name != e.object_name) continue;
    if (best == nullptr || obj.instance_id < best->instance_id) best = &obj;
  }
  if (best == nullptr) {
    throw EvalError(EvalErrorKind::missing_object, e.object_name);
  }
  return *best;
}

RuntimeValue eval_accessor(const Expr& e, const EvalContext& ctx) {
  const ActionProposal& a = *ctx.action;
  const Observation& obs = *ctx.observation;
  switch (e.accessor) {
    case AccessorKind::action_name: return a.name;
    case AccessorKind::action_target: return a.target;
    case AccessorKind::held_object: return obs.held_object.empty() ? std::string("none") : obs.held_object;
    case AccessorKind::location:
      return obs.agent_location.empty() ? std::string("unknown") : obs.agent_location;
    case AccessorKind::object_exists: {
      for (const auto& obj : obs.objects) {
        if (obj.name == e.object_name) return true;
      }
      return false;
    }
    case AccessorKind::object_state: {
      const SceneObject& obj = resolve_object(e, obs);
      auto it = obj.states.find(e.key);
      if (it == obj.states.end()) {
        throw EvalError(EvalErrorKind::missing_state, e.object_name + "." + e.key);
      }
      if (std::holds_alternative<bool>(it->second)) return std::get<bool>(it->second);
      return std::get<double>(it->second);
    }
    case AccessorKind::object_material: {
      const SceneObject& obj = resolve_object(e, obs);
      auto it = obj.materials.find(e.key);
      if (it == obj.materials.end()) {
        throw EvalError(EvalErrorKind::missing_material, e.object_name + "." + e.key);
      }
      return it->second;
    }
    case AccessorKind::object_contains: {
      const SceneObject& obj = resolve_object(e, obs);
      for (const auto& id : obj.contains) {
        const SceneObject* inner = obs.find_instance(id);
        if (inner != nullptr ? inner->name == e.key : id == e.key) return true;
      }
      return false;
    }
  }
  throw EvalError(EvalErrorKind::type_mismatch, "accessor");
}

RuntimeValue eval_value(const Expr& e, const EvalContext& ctx);

bool runtime_equal(const RuntimeValue& l, const RuntimeValue& r, const std::string& where) {
  if (std::holds_alternative<std::string>(l) && std::holds_alternative<std::string>(r)) {
    return iequals(std::get<std::string>(l), std::get<std::string>(r));
  }
  if (std::holds_alternative<double>(l) && std::holds_alternative<double>(r)) {
    return std::get<double>(l) == std::get<double>(r);
  }
  if (std::holds_alternative<bool>(l) && std::holds_alternative<bool>(r)) {
    return std::get<bool>(l) == std::get<bool>(r);
  }
  throw EvalError(EvalErrorKind::type_mismatch, where);
}

bool eval_bool(const Expr& e, const EvalContext& ctx) {
  switch (e.kind) {
    case NodeKind::logical_and: {
      bool l = eval_bool(*e.lhs, ctx);
      bool r = eval_bool(*e.rhs, ctx);
      return l && r;
    }
    case NodeKind::logical_or: {
      bool l = eval_bool(*e.lhs, ctx);
      bool r = eval_bool(*e.rhs, ctx);
      return l || r;
    }
    case NodeKind::logical_not:
      return !eval_bool(*e.lhs, ctx);
    case NodeKind::compare: {
      RuntimeValue l = eval_value(*e.lhs, ctx);
      RuntimeValue r = eval_value(*e.rhs, ctx);
      const std::string where = compare_op_text(e.op);
      switch (e.op) {
        case CompareOp::eq: return runtime_equal(l, r, where);
        case CompareOp::ne: return !runtime_equal(l, r, where);
        default: {
          if (!std::holds_alternative<double>(l) || !std::holds_alternative<double>(r)) {
            throw EvalError(EvalErrorKind::type_mismatch, where);
          }
          double lv = std::get<double>(l), rv = std::get<double>(r);
          switch (e.op) {
            case CompareOp::lt: return lv < rv;
            case CompareOp::le: return lv <= rv;
            case CompareOp::gt: return lv > rv;
            case CompareOp::ge: return lv >= rv;
            default: return false;
          }
        }
      }
    }
    case NodeKind::membership: {
      RuntimeValue l = eval_value(*e.lhs, ctx);
      bool found = false;
      for (const auto& item : e.items) {
        if (runtime_equal(l, from_literal(item), e.negated ? "not in" : "in")) found = true;
      }
      return e.negated ? !found : found;
    }
    case NodeKind::literal:
    case NodeKind::accessor: {
      RuntimeValue v = eval_value(e, ctx);
      if (!std::holds_alternative<bool>(v)) {
        throw EvalError(EvalErrorKind::type_mismatch,
                        e.kind == NodeKind::accessor ? accessor_text(e) : "literal");
      }
      return std::get<bool>(v);
    }
  }
  throw EvalError(EvalErrorKind::type_mismatch, "expression");
}

RuntimeValue eval_value(const Expr& e, const EvalContext& ctx) {
  switch (e.kind) {
    case NodeKind::literal: return from_literal(e.value);
    case NodeKind::accessor: return eval_accessor(e, ctx);
    default: return eval_bool(e, ctx);
  }
}

}  // namespace

ExprPtr parse_predicate(std::string_view source) {
  if (source.size() > kMaxSourceLength) {
    throw ParseError("source exceeds 4096 bytes", 1, 1);
  }
  Lexer lexer(source);
  Parser parser(lexer.tokenize());
  return parser.parse();
}

std::string print_predicate(const Expr& e) {
  switch (e.kind) {
    case NodeKind::literal: return literal_text(e.value);
    case NodeKind::accessor: return accessor_text(e);
    case NodeKind::compare:
      return "(" + print_predicate(*e.lhs) + " " + compare_op_text(e.op) + " " +
             print_predicate(*e.rhs) + ")";
    case NodeKind::membership: {
      std::string out = "(" + print_predicate(*e.lhs) + (e.negated ? " not in [" : " in [");
      for (size_t i = 0; i < e.items.size(); ++i) {
        if (i > 0) out += ", ";
        out += literal_text(e.items[i]);
      }
      out += "])";
      return out;
    }
    case NodeKind::logical_not:
      return "(not " + print_predicate(*e.lhs) + ")";
    case NodeKind::logical_and:
      return "(" + print_predicate(*e.lhs) + " and " + print_predicate(*e.rhs) + ")";
    case NodeKind::logical_or:
      return "(" + print_predicate(*e.lhs) + " or " + print_predicate(*e.rhs) + ")";
  }
  return "false";
}

bool evaluate_predicate(const Expr& expr, const EvalContext& ctx) {
  if (ctx.action == nullptr || ctx.observation == nullptr) {
    throw std::invalid_argument("EvalContext must reference an action and an observation");
  }
  return eval_bool(expr, ctx);
}

bool evaluate_predicate(const Expr& expr, const ActionProposal& action, const Observation& obs) {
  EvalContext ctx;
  ctx.action = &action;
  ctx.observation = &obs;
  return evaluate_predicate(expr, ctx);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::literal: return a.value == b.value;
    case NodeKind::accessor:
      return a.accessor == b.accessor && a.object_name == b.object_name && a.key == b.key;
    case NodeKind::compare:
      return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
    case NodeKind::membership:
      return a.negated == b.negated && a.items == b.items && structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::logical_not: return structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::logical_and:
    case NodeKind::logical_or:
      return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

int depth(const Expr& e) {
  int child = 0;
  if (e.lhs) child = std::max(child, depth(*e.lhs));
  if (e.rhs) child = std::max(child, depth(*e.rhs));
  return 1 + child;
}

int node_count(const Expr& e) {
  int n = 1;
  if (e.lhs) n += node_count(*e.lhs);
  if (e.rhs) n += node_count(*e.rhs);
  return n;
}

std::set<std::string> referenced_tokens(const Expr& e) {
  std::set<std::string> out;
  auto add_literal = [&out](const LiteralValue& v) {
    if (std::holds_alternative<std::string>(v)) out.insert(to_lower(std::get<std::string>(v)));
  };
  struct Walker {
    std::set<std::string>& out;
    decltype(add_literal)& add;
    void walk(const Expr& x) {
      if (x.kind == NodeKind::accessor) {
        if (!x.object_name.empty()) out.insert(to_lower(x.object_name));
        if (!x.key.empty()) out.insert(to_lower(x.key));
      }
      if (x.kind == NodeKind::literal) add(x.value);
      for (const auto& item : x.items) add(item);
      if (x.lhs) walk(*x.lhs);
      if (x.rhs) walk(*x.rhs);
    }
  } walker{out, add_literal};
  walker.walk(e);
  return out;
}

}  // namespace guardrail::dsl
