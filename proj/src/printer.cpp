#include <algorithm>
#include <charconv>
#include <cmath>
#include <tuple>
#include <functional>
#include <sstream>

#include "squery/dsl.hpp"

namespace squery {

namespace {

std::string number_text(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  // Negative literals are wrapped so that they reparse as one number.
  if (std::signbit(v)) return "(" + s + ")";
  return s;
}

std::string param_text(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string binary(const ExprPtr& e, const char* op) {
  return "(" + print_expr(e->args[0]) + " " + op + " " + print_expr(e->args[1]) + ")";
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  if (!e) return "";
  const auto& a = e->args;
  switch (e->kind) {
    case ExprKind::Number: return number_text(e->number);
    case ExprKind::Boolean: return e->boolean ? "true" : "false";
    case ExprKind::Dist: {
      std::string s = std::string(dist_name(e->dist.kind)) + "(";
      for (std::size_t i = 0; i < e->dist.params.size(); ++i) {
        if (i) s += ", ";
        s += param_text(e->dist.params[i]);
      }
      return s + ")";
    }
    case ExprKind::Ident:
    case ExprKind::ObjectRef:
    case ExprKind::RegionNamed:
      return e->name;
    case ExprKind::SelfRef: return "self";
    case ExprKind::RegionAll: return "lane";
    case ExprKind::Property: {
      const auto k = a[0]->kind;
      const bool bare = k == ExprKind::ObjectRef || k == ExprKind::SelfRef || k == ExprKind::Ident;
      const std::string base = print_expr(a[0]);
      return (bare ? base : "(" + base + ")") + "." + e->name;
    }
    case ExprKind::Vector: {
      std::string s = "(";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += print_expr(a[i]);
      }
      return s + ")";
    }
    case ExprKind::Neg: return "(-" + print_expr(a[0]) + ")";
    case ExprKind::Add: return binary(e, "+");
    case ExprKind::Sub: return binary(e, "-");
    case ExprKind::Mul: return binary(e, "*");
    case ExprKind::Div: return binary(e, "/");
    case ExprKind::Deg: return "(" + print_expr(a[0]) + " deg)";
    case ExprKind::RelativeTo: return binary(e, "relative to");
    case ExprKind::Distance: return "(distance from " + print_expr(a[0]) + " to " + print_expr(a[1]) + ")";
    case ExprKind::AngleTo: return "(angle from " + print_expr(a[0]) + " to " + print_expr(a[1]) + ")";
    case ExprKind::RelativeHeading:
      return "(relative heading of " + print_expr(a[0]) + " from " + print_expr(a[1]) + ")";
    case ExprKind::ApparentHeading:
      return "(apparent heading of " + print_expr(a[0]) + " from " + print_expr(a[1]) + ")";
    case ExprKind::CanSee: return binary(e, "can see");
    case ExprKind::In: return binary(e, "in");
    case ExprKind::Not: return "(not " + print_expr(a[0]) + ")";
    case ExprKind::And: return binary(e, "and");
    case ExprKind::Or: return binary(e, "or");
    case ExprKind::Compare: return binary(e, cmp_symbol(e->cmp));
    case ExprKind::OffsetBy: return binary(e, "offset by");
    case ExprKind::OffsetAlongBy:
      return "(" + print_expr(a[0]) + " offset along " + print_expr(a[1]) + " by " + print_expr(a[2]) + ")";
    case ExprKind::Visible: return binary(e, "visible from");
    case ExprKind::NotVisible: return binary(e, "not visible from");
    // Internal forms print in a readable but non-reparsable notation.
    case ExprKind::PointNear: return "near(" + print_expr(a[0]) + ", " + print_expr(a[1]) + ")";
    case ExprKind::HeadingEq: return "same_heading(" + print_expr(a[0]) + ", " + print_expr(a[1]) + ")";
    case ExprKind::LocalCoords:
      return "local(" + print_expr(a[0]) + ", " + print_expr(a[1]) + ", " + print_expr(a[2]) + ")";
    case ExprKind::Component: return print_expr(a[0]) + "[" + param_text(e->number) + "]";
    case ExprKind::FollowDistance:
      return "along_lane(" + print_expr(a[0]) + ", " + print_expr(a[1]) + ", " + print_expr(a[2]) + ")";
    case ExprKind::ChildTerminated: return "terminated(" + param_text(e->number) + ")";
  }
  return "?";
}

namespace {

std::string specifier_text(const Specifier& s) {
  const auto& a = s.args;
  auto p = [&](std::size_t i) { return print_expr(a[i]); };
  switch (s.kind) {
    case SpecifierKind::At: return "at " + p(0);
    case SpecifierKind::In: return "in " + p(0);
    case SpecifierKind::On: return "on " + p(0);
    case SpecifierKind::OffsetBy: return "offset by " + p(0);
    case SpecifierKind::Beyond: return "beyond " + p(0) + " by " + p(1) + " from " + p(2);
    case SpecifierKind::VisibleFrom: return "visible from " + p(0);
    case SpecifierKind::AheadOf: return "ahead of " + p(0) + (a[1] ? " by " + p(1) : "");
    case SpecifierKind::Behind: return "behind " + p(0) + (a[1] ? " by " + p(1) : "");
    case SpecifierKind::Following: return "following " + p(0) + " from " + p(1) + " for " + p(2);
    case SpecifierKind::Facing: return "facing " + p(0);
    case SpecifierKind::FacingToward: return "facing toward " + p(0);
    case SpecifierKind::FacingAwayFrom: return "facing away from " + p(0);
    case SpecifierKind::ApparentlyFacing: return "apparently facing " + p(0) + " from " + p(1);
  }
  return "?";
}

void print_stmt(std::ostringstream& out, const StmtPtr& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
  switch (s->kind) {
    case StmtKind::Do:
      out << pad << "do " << s->behavior << "()";
      if (s->condition) out << " until " << print_expr(s->condition);
      out << '\n';
      break;
    case StmtKind::Seq:
      for (const auto& c : s->children) print_stmt(out, c, indent);
      break;
    case StmtKind::TryInterrupt:
      out << pad << "try:\n";
      print_stmt(out, s->children[0], indent + 1);
      out << pad << "interrupt when " << print_expr(s->condition) << ":\n";
      print_stmt(out, s->children[1], indent + 1);
      break;
    case StmtKind::Unsupported:
      out << pad << "# unsupported: " << s->construct << '\n';
      break;
  }
}

}  // namespace

std::string print_program(const ScenarioAST& ast) {
  std::ostringstream out;
  for (const auto& u : ast.unsupported) out << "# unsupported: " << u.construct << '\n';
  for (const auto& [name, decl] : ast.declared_primitives) {
    out << "primitive " << name;
    if (decl.completion) out << " completes when " << print_expr(decl.completion);
    out << '\n';
  }
  for (const auto& [name, def] : ast.behaviors) {
    out << "behavior " << name << "():\n";
    print_stmt(out, def.body, 1);
  }
  for (const auto& o : ast.objects) {
    if (!o.anonymous) out << o.name << " = ";
    out << "new " << o.object_class;
    std::vector<std::string> parts;
    for (const auto& s : o.specifiers) parts.push_back(specifier_text(s));
    if (o.behavior) parts.push_back("with behavior " + *o.behavior);
    if (o.visible_distance) parts.push_back("with visibleDistance " + param_text(*o.visible_distance));
    if (o.view_angle) parts.push_back("with viewAngle " + param_text(*o.view_angle));
    for (std::size_t i = 0; i < parts.size(); ++i) out << (i ? ", " : " ") << parts[i];
    out << '\n';
  }
  for (const auto& r : ast.requirements) out << "require " << print_expr(r.condition) << '\n';
  return out.str();
}

std::string Violation::to_string() const {
  return "line " + std::to_string(loc.line) + ", column " + std::to_string(loc.column) + ": " + construct;
}

std::vector<Violation> fragment_check(const ScenarioAST& ast) {
  std::vector<Violation> out;
  for (const auto& u : ast.unsupported) out.push_back({u.construct, u.loc});
  for (const auto& o : ast.objects) {
    for (const auto& u : o.unsupported) out.push_back({u.construct, u.loc});
  }
  std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& s) {
    if (s->kind == StmtKind::Unsupported) out.push_back({s->construct, s->loc});
    for (const auto& c : s->children) walk(c);
  };
  for (const auto& [_, def] : ast.behaviors) walk(def.body);
  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.loc.line, a.loc.column) < std::tie(b.loc.line, b.loc.column);
  });
  return out;
}

}  // namespace squery
