#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "lexer.hpp"
#include "squery/dsl.hpp"
#include "squery/geometry.hpp"

namespace squery {

using detail::Tok;
using detail::Token;

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "behavior", "do",      "until",   "try",      "interrupt", "when",  "new",      "with",   "require",
      "primitive", "completes", "at",    "in",       "on",        "offset", "by",     "along",  "beyond",
      "from",     "visible", "ahead",   "of",       "behind",    "following", "for",  "facing", "toward",
      "away",     "apparently", "distance", "angle", "to",        "relative", "heading", "apparent", "can",
      "see",      "not",     "and",     "or",       "true",      "false", "deg",      "self",   "except"};
  return k;
}

// Keywords that open a statement we recognize but do not support.
const std::set<std::string>& unsupported_statements() {
  static const std::set<std::string> k = {"take",  "wait",   "terminate", "abort",   "record",  "param",
                                          "model", "monitor", "import",   "from",    "scenario", "mutate",
                                          "def",   "class",  "override",  "if",      "while",   "for",
                                          "pass",  "return", "simulator", "workspace", "setup", "compose"};
  return k;
}

std::optional<DistKind> dist_kind(const std::string& name) {
  if (name == "Range") return DistKind::Range;
  if (name == "Uniform") return DistKind::Uniform;
  if (name == "Normal") return DistKind::Normal;
  if (name == "TruncatedNormal") return DistKind::TruncatedNormal;
  return std::nullopt;
}

// Folds an expression made only of literals and arithmetic; nullopt otherwise.
std::optional<double> constant_value(const ExprPtr& e) {
  auto sub = [&](std::size_t i) { return constant_value(e->args[i]); };
  switch (e->kind) {
    case ExprKind::Number: return e->number;
    case ExprKind::Neg: {
      auto a = sub(0);
      return a ? std::optional<double>(-*a) : std::nullopt;
    }
    case ExprKind::Deg: {
      auto a = sub(0);
      return a ? std::optional<double>(*a * kPi / 180.0) : std::nullopt;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      auto a = sub(0), b = sub(1);
      if (!a || !b) return std::nullopt;
      if (e->kind == ExprKind::Add) return *a + *b;
      if (e->kind == ExprKind::Sub) return *a - *b;
      if (e->kind == ExprKind::Mul) return *a * *b;
      return *a / *b;
    }
    default: return std::nullopt;
  }
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const ParseOptions& opts) : toks_(std::move(toks)), opts_(opts) {}

  ScenarioAST run() {
    while (!at(Tok::End)) {
      if (accept_kind(Tok::Newline)) continue;
      top_level();
    }
    return std::move(ast_);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ParseOptions& opts_;
  ScenarioAST ast_;
  int anon_count_ = 0;

  // ---- token helpers
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok kind, std::size_t k = 0) const { return peek(k).kind == kind; }
  bool is_name(const char* text, std::size_t k = 0) const {
    return peek(k).kind == Tok::Name && peek(k).text == text;
  }
  bool is_punct(const char* text, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == text;
  }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept_kind(Tok kind) {
    if (!at(kind)) return false;
    advance();
    return true;
  }
  bool accept_name(const char* text) {
    if (!is_name(text)) return false;
    advance();
    return true;
  }
  bool accept_punct(const char* text) {
    if (!is_punct(text)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string found;
    switch (t.kind) {
      case Tok::Name:
      case Tok::Number:
      case Tok::Punct: found = "'" + t.text + "'"; break;
      case Tok::Newline: found = "end of line"; break;
      case Tok::Indent: found = "indented block"; break;
      case Tok::Dedent: found = "end of block"; break;
      case Tok::End: found = "end of input"; break;
    }
    throw SyntaxError("expected " + what + ", found " + found, t.loc);
  }
  void expect_name(const char* text) {
    if (!accept_name(text)) fail(std::string("'") + text + "'");
  }
  void expect_punct(const char* text) {
    if (!accept_punct(text)) fail(std::string("'") + text + "'");
  }
  void expect_newline() {
    if (!accept_kind(Tok::Newline) && !at(Tok::End)) fail("end of line");
  }
  std::string identifier(const char* what) {
    if (!at(Tok::Name) || keywords().count(peek().text)) fail(what);
    return advance().text;
  }

  // Skips the rest of the logical line, plus an indented block if the line
  // opened one.
  void skip_statement() {
    bool colon = false;
    while (!at(Tok::Newline) && !at(Tok::End)) {
      colon = is_punct(":");
      advance();
    }
    accept_kind(Tok::Newline);
    if (colon && at(Tok::Indent)) skip_block();
  }
  void skip_block() {
    int depth = 0;
    do {
      if (at(Tok::Indent)) ++depth;
      if (at(Tok::Dedent)) --depth;
      if (at(Tok::End)) return;
      advance();
    } while (depth > 0);
  }

  // ---- top level
  void top_level() {
    const Token& t = peek();
    if (t.kind != Tok::Name) {
      if (t.kind == Tok::Indent) throw SyntaxError("unexpected indentation", t.loc);
      fail("a declaration");
    }
    if (t.text == "behavior") return behavior_def();
    if (t.text == "primitive") return primitive_decl();
    if (t.text == "require") return requirement();
    if (t.text == "new") return object_decl(std::nullopt);
    if (is_punct("=", 1)) {
      if (is_name("new", 2)) {
        const std::string name = identifier("object name");
        advance();  // '='
        return object_decl(name);
      }
      ast_.unsupported.push_back({"variable assignment", t.loc});
      return skip_statement();
    }
    if (unsupported_statements().count(t.text)) {
      ast_.unsupported.push_back({t.text + " statement", t.loc});
      return skip_statement();
    }
    fail("a declaration");
  }

  void behavior_def() {
    const SourceLoc loc = advance().loc;
    BehaviorDef def;
    def.loc = loc;
    def.name = identifier("behavior name");
    expect_punct("(");
    if (!is_punct(")")) {
      ast_.unsupported.push_back({"behavior parameters", peek().loc});
      while (!is_punct(")")) advance();
    }
    expect_punct(")");
    def.body = block();
    if (ast_.behaviors.count(def.name)) throw SemanticError("behavior '" + def.name + "' defined twice", loc);
    ast_.behaviors.emplace(def.name, std::move(def));
  }

  void primitive_decl() {
    const SourceLoc loc = advance().loc;
    PrimitiveDecl decl;
    decl.loc = loc;
    decl.name = identifier("primitive name");
    if (accept_name("completes")) {
      expect_name("when");
      decl.completion = expr();
    }
    expect_newline();
    if (ast_.declared_primitives.count(decl.name))
      throw SemanticError("primitive '" + decl.name + "' declared twice", loc);
    ast_.declared_primitives.emplace(decl.name, std::move(decl));
  }

  void requirement() {
    const SourceLoc loc = advance().loc;
    if (is_punct("[")) {
      ast_.unsupported.push_back({"soft requirement", loc});
      return skip_statement();
    }
    if (is_name("always") || is_name("eventually") || is_name("monitor")) {
      ast_.unsupported.push_back({"temporal requirement", loc});
      return skip_statement();
    }
    ast_.requirements.push_back({expr(), loc});
    expect_newline();
  }

  void object_decl(std::optional<std::string> name) {
    const SourceLoc loc = peek().loc;
    expect_name("new");
    ObjectDecl obj;
    obj.loc = loc;
    obj.object_class = identifier("object class");
    if (name) {
      obj.name = *name;
    } else {
      obj.anonymous = true;
      obj.name = "_anon" + std::to_string(++anon_count_);
    }
    if (!at(Tok::Newline) && !at(Tok::End)) {
      specifier(obj);
      while (accept_punct(",")) specifier(obj);
    }
    expect_newline();
    ast_.objects.push_back(std::move(obj));
  }

  void skip_specifier() {
    int depth = 0;
    while (!at(Tok::End) && !at(Tok::Newline)) {
      if (depth == 0 && is_punct(",")) return;
      if (is_punct("(") || is_punct("[")) ++depth;
      if (is_punct(")") || is_punct("]")) --depth;
      advance();
    }
  }

  static ExprPtr implicit_ego(SourceLoc loc) { return make_object("ego", loc); }

  void specifier(ObjectDecl& obj) {
    const Token& t = peek();
    const SourceLoc loc = t.loc;
    if (t.kind != Tok::Name) fail("a specifier");
    auto push = [&](SpecifierKind kind, std::vector<ExprPtr> args) {
      obj.specifiers.push_back({kind, std::move(args), loc});
    };
    auto unsupported = [&](const std::string& what) {
      obj.unsupported.push_back({what, loc});
      skip_specifier();
    };
    const std::string word = t.text;
    if (word == "with") {
      advance();
      const std::string prop = at(Tok::Name) ? peek().text : "";
      if (prop == "behavior") {
        advance();
        obj.behavior = identifier("behavior name");
        if (accept_punct("(")) {
          if (!is_punct(")")) {
            obj.unsupported.push_back({"behavior arguments", peek().loc});
            while (!is_punct(")")) advance();
          }
          expect_punct(")");
        }
        return;
      }
      if (prop == "visibleDistance" || prop == "viewAngle") {
        advance();
        const ExprPtr value = expr();
        const auto v = constant_value(value);
        if (!v) throw SemanticError(prop + " must be a constant", value->loc);
        if (!(*v > 0) || !std::isfinite(*v)) throw SemanticError(prop + " must be positive", value->loc);
        if (prop == "visibleDistance") {
          obj.visible_distance = *v;
        } else {
          if (*v > kTwoPi) throw SemanticError("viewAngle must not exceed a full turn", value->loc);
          obj.view_angle = *v;
        }
        return;
      }
      return unsupported("with " + (prop.empty() ? std::string("property") : prop));
    }
    if (word == "at") {
      advance();
      return push(SpecifierKind::At, {expr()});
    }
    if (word == "in" || word == "on") {
      advance();
      return push(word == "in" ? SpecifierKind::In : SpecifierKind::On, {expr()});
    }
    if (word == "offset") {
      advance();
      if (is_name("along")) return unsupported("offset along specifier");
      expect_name("by");
      return push(SpecifierKind::OffsetBy, {expr()});
    }
    if (word == "beyond") {
      advance();
      ExprPtr target = expr();
      expect_name("by");
      ExprPtr offset = expr();
      ExprPtr from = accept_name("from") ? expr() : implicit_ego(loc);
      return push(SpecifierKind::Beyond, {target, offset, from});
    }
    if (word == "visible") {
      advance();
      ExprPtr viewer = accept_name("from") ? expr() : implicit_ego(loc);
      return push(SpecifierKind::VisibleFrom, {viewer});
    }
    if (word == "not" && is_name("visible", 1)) return unsupported("not visible specifier");
    if (word == "ahead") {
      advance();
      expect_name("of");
      ExprPtr target = expr();
      ExprPtr by = accept_name("by") ? expr() : nullptr;
      return push(SpecifierKind::AheadOf, {target, by});
    }
    if (word == "behind") {
      advance();
      ExprPtr target = expr();
      ExprPtr by = accept_name("by") ? expr() : nullptr;
      return push(SpecifierKind::Behind, {target, by});
    }
    if (word == "following") {
      advance();
      ExprPtr field = expr();
      ExprPtr from = accept_name("from") ? expr() : implicit_ego(loc);
      expect_name("for");
      ExprPtr dist = expr();
      return push(SpecifierKind::Following, {field, from, dist});
    }
    if (word == "facing") {
      advance();
      if (accept_name("toward")) return push(SpecifierKind::FacingToward, {expr()});
      if (accept_name("away")) {
        expect_name("from");
        return push(SpecifierKind::FacingAwayFrom, {expr()});
      }
      if (is_name("directly")) return unsupported("facing directly specifier");
      return push(SpecifierKind::Facing, {expr()});
    }
    if (word == "apparently") {
      advance();
      expect_name("facing");
      ExprPtr heading = expr();
      ExprPtr from = accept_name("from") ? expr() : implicit_ego(loc);
      return push(SpecifierKind::ApparentlyFacing, {heading, from});
    }
    if ((word == "left" || word == "right") && is_name("of", 1)) return unsupported(word + " of specifier");
    if (word == "contained" || word == "as") return unsupported(word + " specifier");
    fail("a specifier");
  }

  // ---- behavior statements
  StmtPtr block() {
    expect_punct(":");
    if (!accept_kind(Tok::Newline)) fail("end of line");
    if (!accept_kind(Tok::Indent)) fail("an indented block");
    std::vector<StmtPtr> stmts;
    const SourceLoc loc = peek().loc;
    while (!at(Tok::Dedent) && !at(Tok::End)) {
      if (accept_kind(Tok::Newline)) continue;
      stmts.push_back(statement());
    }
    accept_kind(Tok::Dedent);
    if (stmts.size() == 1) return stmts.front();
    auto seq = std::make_shared<Stmt>();
    seq->kind = StmtKind::Seq;
    seq->children = std::move(stmts);
    seq->loc = loc;
    return seq;
  }

  StmtPtr unsupported_stmt(const std::string& construct, SourceLoc loc) {
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Unsupported;
    s->construct = construct;
    s->loc = loc;
    return s;
  }

  StmtPtr statement() {
    const Token& t = peek();
    const SourceLoc loc = t.loc;
    if (t.kind == Tok::Indent) throw SyntaxError("unexpected indentation", loc);
    if (t.kind != Tok::Name) fail("a statement");
    if (t.text == "do") return do_statement();
    if (t.text == "try") return try_statement();
    if (t.text == "require") {
      skip_statement();
      return unsupported_stmt("require inside behavior", loc);
    }
    if (is_punct("=", 1) || (is_punct(".", 1) && at(Tok::Name, 2) && is_punct("=", 3))) {
      skip_statement();
      return unsupported_stmt("variable assignment", loc);
    }
    if (unsupported_statements().count(t.text)) {
      const std::string what = t.text + " statement";
      skip_statement();
      return unsupported_stmt(what, loc);
    }
    fail("a statement");
  }

  StmtPtr do_statement() {
    const SourceLoc loc = advance().loc;
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::Do;
    s->loc = loc;
    if (is_name("choose") || is_name("shuffle")) {
      skip_statement();
      return unsupported_stmt("do " + toks_[pos_ - 1].text, loc);
    }
    s->behavior = identifier("behavior name");
    if (accept_punct("(")) {
      if (!is_punct(")")) {
        skip_statement();
        return unsupported_stmt("behavior arguments", loc);
      }
      expect_punct(")");
    }
    if (is_punct(",")) {
      skip_statement();
      return unsupported_stmt("parallel do", loc);
    }
    if (is_name("for")) {
      skip_statement();
      return unsupported_stmt("do for", loc);
    }
    if (accept_name("until")) s->condition = expr();
    expect_newline();
    return s;
  }

  StmtPtr try_statement() {
    const SourceLoc loc = advance().loc;
    StmtPtr body = block();
    std::vector<std::pair<ExprPtr, StmtPtr>> handlers;
    bool extra = false;
    while (true) {
      if (is_name("interrupt")) {
        advance();
        expect_name("when");
        ExprPtr cond = expr();
        handlers.emplace_back(cond, block());
      } else if (is_name("except")) {
        extra = true;
        skip_statement();
      } else {
        break;
      }
    }
    if (handlers.empty()) throw SyntaxError("try block without an interrupt handler", loc);
    if (handlers.size() > 1) return unsupported_stmt("multiple interrupt handlers", loc);
    if (extra) return unsupported_stmt("except handler", loc);
    auto s = std::make_shared<Stmt>();
    s->kind = StmtKind::TryInterrupt;
    s->condition = handlers[0].first;
    s->children = {body, handlers[0].second};
    s->loc = loc;
    return s;
  }

  // ---- expressions
  ExprPtr expr() { return or_expr(); }

  ExprPtr or_expr() {
    ExprPtr lhs = and_expr();
    while (is_name("or")) {
      const SourceLoc loc = advance().loc;
      lhs = make_node(ExprKind::Or, {lhs, and_expr()}, loc);
    }
    return lhs;
  }

  ExprPtr and_expr() {
    ExprPtr lhs = not_expr();
    while (is_name("and")) {
      const SourceLoc loc = advance().loc;
      lhs = make_node(ExprKind::And, {lhs, not_expr()}, loc);
    }
    return lhs;
  }

  ExprPtr not_expr() {
    if (is_name("not") && !is_name("visible", 1)) {
      const SourceLoc loc = advance().loc;
      return make_node(ExprKind::Not, {not_expr()}, loc);
    }
    return comparison();
  }

  ExprPtr comparison() {
    ExprPtr lhs = infix();
    static const std::pair<const char*, CmpOp> ops[] = {{"<", CmpOp::Lt},  {"<=", CmpOp::Le}, {">", CmpOp::Gt},
                                                        {">=", CmpOp::Ge}, {"==", CmpOp::Eq}, {"!=", CmpOp::Ne}};
    for (const auto& [text, op] : ops) {
      if (is_punct(text)) {
        const SourceLoc loc = advance().loc;
        ExprPtr rhs = infix();
        for (const auto& [t2, _] : ops) {
          if (is_punct(t2)) throw SyntaxError("chained comparisons are not supported", peek().loc);
        }
        return make_compare(op, lhs, rhs, loc);
      }
    }
    return lhs;
  }

  ExprPtr infix() {
    ExprPtr lhs = additive();
    while (true) {
      const SourceLoc loc = peek().loc;
      if (is_name("relative") && is_name("to", 1)) {
        advance(), advance();
        lhs = make_node(ExprKind::RelativeTo, {lhs, additive()}, loc);
      } else if (is_name("offset") && is_name("by", 1)) {
        advance(), advance();
        lhs = make_node(ExprKind::OffsetBy, {lhs, additive()}, loc);
      } else if (is_name("offset") && is_name("along", 1)) {
        advance(), advance();
        ExprPtr heading = additive();
        expect_name("by");
        lhs = make_node(ExprKind::OffsetAlongBy, {lhs, heading, additive()}, loc);
      } else if (is_name("can") && is_name("see", 1)) {
        advance(), advance();
        lhs = make_node(ExprKind::CanSee, {lhs, additive()}, loc);
      } else if (is_name("in")) {
        advance();
        lhs = make_node(ExprKind::In, {lhs, additive()}, loc);
      } else if (is_name("visible") && is_name("from", 1)) {
        advance(), advance();
        lhs = make_node(ExprKind::Visible, {lhs, additive()}, loc);
      } else if (is_name("not") && is_name("visible", 1) && is_name("from", 2)) {
        advance(), advance(), advance();
        lhs = make_node(ExprKind::NotVisible, {lhs, additive()}, loc);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr additive() {
    ExprPtr lhs = term();
    while (is_punct("+") || is_punct("-")) {
      const Token& op = advance();
      const ExprKind kind = op.text == "+" ? ExprKind::Add : ExprKind::Sub;
      lhs = make_node(kind, {lhs, term()}, op.loc);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (is_punct("*") || is_punct("/")) {
      const Token& op = advance();
      const ExprKind kind = op.text == "*" ? ExprKind::Mul : ExprKind::Div;
      lhs = make_node(kind, {lhs, unary()}, op.loc);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (is_punct("-")) {
      const SourceLoc loc = advance().loc;
      ExprPtr operand = unary();
      if (operand->kind == ExprKind::Number) return make_number(-operand->number, loc);
      return make_node(ExprKind::Neg, {operand}, loc);
    }
    if (is_punct("+")) {
      advance();
      return unary();
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr e = primary();
    while (true) {
      if (is_name("deg")) {
        const SourceLoc loc = advance().loc;
        e = make_node(ExprKind::Deg, {e}, loc);
      } else if (is_punct(".")) {
        const SourceLoc loc = advance().loc;
        if (!at(Tok::Name)) fail("property name");
        e = make_property(e, advance().text, loc);
      } else {
        return e;
      }
    }
  }

  // Operand of `from` defaults to the ego object when omitted.
  ExprPtr optional_from(SourceLoc loc) { return accept_name("from") ? additive() : implicit_ego(loc); }

  ExprPtr primary() {
    const Token& t = peek();
    const SourceLoc loc = t.loc;
    if (t.kind == Tok::Number) {
      advance();
      return make_number(t.number, loc);
    }
    if (is_punct("(")) {
      advance();
      ExprPtr first = expr();
      if (accept_punct(")")) return first;
      std::vector<ExprPtr> comps{first};
      while (accept_punct(",")) comps.push_back(expr());
      expect_punct(")");
      if (comps.size() > 3) throw SyntaxError("vectors have two or three components", loc);
      return make_node(ExprKind::Vector, std::move(comps), loc);
    }
    if (t.kind != Tok::Name) fail("an expression");
    const std::string word = t.text;
    if (word == "true" || word == "false") {
      advance();
      return make_bool(word == "true", loc);
    }
    if (word == "self") {
      advance();
      return make_node(ExprKind::SelfRef, {}, loc);
    }
    if (word == "distance" || word == "angle") {
      advance();
      ExprPtr from = accept_name("from") ? additive() : implicit_ego(loc);
      expect_name("to");
      ExprPtr to = additive();
      return make_node(word == "distance" ? ExprKind::Distance : ExprKind::AngleTo, {from, to}, loc);
    }
    if ((word == "relative" || word == "apparent") && is_name("heading", 1)) {
      advance(), advance();
      expect_name("of");
      ExprPtr of = additive();
      ExprPtr from = optional_from(loc);
      return make_node(word == "relative" ? ExprKind::RelativeHeading : ExprKind::ApparentHeading, {of, from}, loc);
    }
    if (word == "visible") {
      advance();
      return make_node(ExprKind::Visible, {additive(), implicit_ego(loc)}, loc);
    }
    if (word == "not" && is_name("visible", 1)) {
      advance(), advance();
      return make_node(ExprKind::NotVisible, {additive(), implicit_ego(loc)}, loc);
    }
    if (auto kind = dist_kind(word); kind && is_punct("(", 1)) {
      advance(), advance();
      std::vector<double> params;
      if (!is_punct(")")) {
        do {
          ExprPtr p = expr();
          auto v = constant_value(p);
          if (!v) throw SemanticError("distribution parameters must be constants", p->loc);
          params.push_back(*v);
        } while (accept_punct(","));
      }
      expect_punct(")");
      return make_dist(*kind, std::move(params), -1, loc);
    }
    if (keywords().count(word)) fail("an expression");
    advance();
    if (is_punct("(")) throw SyntaxError("unknown function '" + word + "'", loc);
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Ident;
    e->name = word;
    e->loc = loc;
    return e;
  }
};

// ---- post-parse resolution and checks

enum class Scope { Behavior, Specifier, Requirement };

class Resolver {
 public:
  Resolver(ScenarioAST& ast, const ParseOptions& opts) : ast_(ast), opts_(opts) {}

  void run() {
    if (ast_.objects.empty()) throw SemanticError("program declares no objects", {1, 1});
    std::set<std::string> names;
    for (const auto& o : ast_.objects) {
      if (!names.insert(o.name).second) throw SemanticError("object '" + o.name + "' declared twice", o.loc);
    }
    for (const auto& [name, def] : ast_.behaviors) {
      if (is_primitive_name(name))
        throw SemanticError("behavior '" + name + "' conflicts with a primitive behavior", def.loc);
    }
    for (auto& [name, decl] : ast_.declared_primitives) {
      decl.completion = resolve_condition(decl.completion, Scope::Behavior, 0);
    }
    for (auto& [name, def] : ast_.behaviors) def.body = resolve_stmt(def.body);
    for (std::size_t i = 0; i < ast_.objects.size(); ++i) resolve_object(i);
    for (auto& r : ast_.requirements) r.condition = resolve_condition(r.condition, Scope::Requirement, 0);
    check_recursion();
    number_variables();
  }

 private:
  ScenarioAST& ast_;
  const ParseOptions& opts_;

  bool is_primitive_name(const std::string& n) const {
    return opts_.primitives.count(n) > 0 || ast_.declared_primitives.count(n) > 0;
  }

  void check_behavior_name(const std::string& name, SourceLoc loc) {
    if (is_primitive_name(name)) {
      ast_.primitive_behaviors.insert(name);
      return;
    }
    if (!ast_.behaviors.count(name)) throw SemanticError("unknown behavior '" + name + "'", loc);
  }

  int object_index(const std::string& name) const {
    for (std::size_t i = 0; i < ast_.objects.size(); ++i) {
      if (ast_.objects[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  // `limit` bounds which objects a specifier may mention (those declared before it).
  ExprPtr resolve(const ExprPtr& e, Scope scope, std::size_t limit) {
    return rewrite(e, [&](const ExprPtr& n) -> ExprPtr {
      if (n->kind == ExprKind::SelfRef) {
        if (scope == Scope::Requirement) throw SemanticError("'self' is not available in a requirement", n->loc);
        return nullptr;
      }
      if (n->kind == ExprKind::Dist) {
        try {
          (void)n->dist.support();
        } catch (const SemanticError& err) {
          throw SemanticError(err.message(), n->loc);
        }
        return nullptr;
      }
      std::string name;
      if (n->kind == ExprKind::ObjectRef) {
        name = n->name;
      } else if (n->kind == ExprKind::Ident) {
        name = n->name;
      } else {
        return nullptr;
      }
      const int idx = object_index(name);
      if (idx < 0) {
        if (n->kind == ExprKind::ObjectRef)
          throw SemanticError("implicit reference to 'ego', but no object is named ego", n->loc);
        if (name == "lane" || name == "road" || name == "roadDirection")
          return make_node(ExprKind::RegionAll, {}, n->loc);
        auto r = std::make_shared<Expr>(*n);
        r->kind = ExprKind::RegionNamed;
        return r;
      }
      if (scope == Scope::Specifier && static_cast<std::size_t>(idx) >= limit)
        throw SemanticError("specifier refers to '" + name + "' before it is declared", n->loc);
      if (n->kind == ExprKind::ObjectRef) return nullptr;
      return make_object(name, n->loc);
    });
  }

  ExprPtr resolve_condition(const ExprPtr& e, Scope scope, std::size_t limit) {
    if (!e) return e;
    ExprPtr r = resolve(e, scope, limit);
    const ExprType t = type_of(r);
    if (t != ExprType::Bool)
      throw SemanticError(std::string("condition must be boolean, found ") + type_name(t), r->loc);
    return r;
  }

  StmtPtr resolve_stmt(const StmtPtr& s) {
    auto copy = std::make_shared<Stmt>(*s);
    switch (s->kind) {
      case StmtKind::Do: check_behavior_name(s->behavior, s->loc); break;
      case StmtKind::Unsupported: return copy;
      default: break;
    }
    copy->condition = resolve_condition(s->condition, Scope::Behavior, 0);
    for (auto& c : copy->children) c = resolve_stmt(c);
    return copy;
  }

  static bool positional(ExprType t) { return t == ExprType::Vector || t == ExprType::Object; }

  void expect_type(const ExprPtr& e, bool ok, const char* what) {
    if (!ok) {
      throw SemanticError(std::string("expected ") + what + ", found " + type_name(type_of(e)), e->loc);
    }
  }

  void resolve_object(std::size_t index) {
    ObjectDecl& obj = ast_.objects[index];
    if (!opts_.object_classes.count(obj.object_class))
      throw SemanticError("unknown object class '" + obj.object_class + "'", obj.loc);
    if (obj.behavior) check_behavior_name(*obj.behavior, obj.loc);
    for (auto& spec : obj.specifiers) {
      for (auto& a : spec.args) {
        if (a) a = resolve(a, Scope::Specifier, index);
      }
      const auto& args = spec.args;
      auto type = [&](std::size_t i) { return type_of(args[i]); };
      switch (spec.kind) {
        case SpecifierKind::At:
        case SpecifierKind::OffsetBy:
        case SpecifierKind::FacingToward:
        case SpecifierKind::FacingAwayFrom:
          expect_type(args[0], positional(type(0)), "a vector");
          break;
        case SpecifierKind::In:
        case SpecifierKind::On:
          expect_type(args[0], type(0) == ExprType::Region, "a region");
          break;
        case SpecifierKind::Beyond:
          expect_type(args[0], positional(type(0)), "a vector");
          expect_type(args[1], type(1) == ExprType::Vector, "a vector");
          expect_type(args[2], positional(type(2)), "a vector");
          break;
        case SpecifierKind::VisibleFrom:
          expect_type(args[0], type(0) == ExprType::Object, "an object");
          break;
        case SpecifierKind::AheadOf:
        case SpecifierKind::Behind:
          expect_type(args[0], type(0) == ExprType::Object, "an object");
          if (args[1]) expect_type(args[1], type(1) == ExprType::Scalar, "a scalar");
          break;
        case SpecifierKind::Following:
          if (args[0]->kind != ExprKind::RegionAll)
            throw SemanticError("'following' needs the lane field (lane, road or roadDirection)", args[0]->loc);
          expect_type(args[1], positional(type(1)), "a vector");
          expect_type(args[2], type(2) == ExprType::Scalar, "a scalar");
          break;
        case SpecifierKind::Facing:
          expect_type(args[0], type(0) == ExprType::Scalar, "a scalar");
          break;
        case SpecifierKind::ApparentlyFacing:
          expect_type(args[0], type(0) == ExprType::Scalar, "a scalar");
          expect_type(args[1], positional(type(1)), "a vector");
          break;
      }
    }
  }

  void check_recursion() {
    std::map<std::string, int> state;  // 1 visiting, 2 done
    std::function<void(const std::string&, SourceLoc)> dfs = [&](const std::string& name, SourceLoc loc) {
      auto it = ast_.behaviors.find(name);
      if (it == ast_.behaviors.end()) return;
      int& st = state[name];
      if (st == 2) return;
      if (st == 1) throw SemanticError("behavior '" + name + "' is recursive", loc);
      st = 1;
      std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& s) {
        if (s->kind == StmtKind::Do) dfs(s->behavior, s->loc);
        for (const auto& c : s->children) walk(c);
      };
      walk(it->second.body);
      state[name] = 2;
    };
    for (const auto& [name, def] : ast_.behaviors) dfs(name, def.loc);
  }

  // Variable ids follow printing order so that printing and reparsing is stable.
  void number_variables() {
    int next = 0;
    auto number = [&](const ExprPtr& e) {
      return rewrite(e, [&](const ExprPtr& n) -> ExprPtr {
        if (n->kind != ExprKind::Dist) return nullptr;
        auto c = std::make_shared<Expr>(*n);
        c->dist.var_id = next++;
        return c;
      });
    };
    std::function<StmtPtr(const StmtPtr&)> number_stmt = [&](const StmtPtr& s) -> StmtPtr {
      auto c = std::make_shared<Stmt>(*s);
      if (s->kind == StmtKind::TryInterrupt) {
        // printed order: try body, condition, handler
        c->children[0] = number_stmt(s->children[0]);
        c->condition = number(s->condition);
        c->children[1] = number_stmt(s->children[1]);
        return c;
      }
      c->condition = number(s->condition);
      for (auto& child : c->children) child = number_stmt(child);
      return c;
    };
    for (auto& [_, decl] : ast_.declared_primitives) decl.completion = number(decl.completion);
    for (auto& [_, def] : ast_.behaviors) def.body = number_stmt(def.body);
    for (auto& o : ast_.objects) {
      for (auto& s : o.specifiers) {
        for (auto& a : s.args) a = number(a);
      }
    }
    for (auto& r : ast_.requirements) r.condition = number(r.condition);
    ast_.variable_count = next;
  }
};

}  // namespace

ScenarioAST parse_unchecked(std::string_view source, const ParseOptions& options) {
  Parser parser(detail::tokenize(source), options);
  ScenarioAST ast = parser.run();
  Resolver(ast, options).run();
  return ast;
}

ScenarioAST parse(std::string_view source, const ParseOptions& options) {
  ScenarioAST ast = parse_unchecked(source, options);
  const auto violations = fragment_check(ast);
  if (!violations.empty()) {
    throw UnsupportedFeature(violations.front().construct + " is outside the supported fragment",
                             violations.front().loc);
  }
  return ast;
}

ScenarioAST parse_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), options);
}

}  // namespace squery
