#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "squery/ast.hpp"

namespace squery {

struct ParseOptions {
  /// Primitive behaviors known without a `primitive` declaration.
  std::set<std::string> primitives = {"FollowLane", "LaneChange", "Stationary", "TurnLeft",
                                      "TurnRight", "Brake", "Walk"};
  /// Registry of object classes accepted after `new`.
  std::set<std::string> object_classes = {"Car", "Truck", "Bus", "Pedestrian", "Bicycle", "Motorcycle"};
};

/// Parses scenario source and rejects anything outside the supported fragment.
/// Throws SyntaxError, UnsupportedFeature or SemanticError.
ScenarioAST parse(std::string_view source, const ParseOptions& options = {});

/// Like parse(), but keeps recognized out-of-fragment constructs in the AST
/// so fragment_check() can report them. Still throws SyntaxError and
/// SemanticError.
ScenarioAST parse_unchecked(std::string_view source, const ParseOptions& options = {});

ScenarioAST parse_file(const std::string& path, const ParseOptions& options = {});

struct Violation {
  std::string construct;
  SourceLoc loc;
  std::string to_string() const;
};

/// Every construct of `ast` outside the supported fragment, in source order.
std::vector<Violation> fragment_check(const ScenarioAST& ast);

/// Renders `ast` as source text that parses back to the same tree.
std::string print_program(const ScenarioAST& ast);
std::string print_expr(const ExprPtr& e);

/// Static type of a resolved expression; throws SemanticError on a mismatch.
ExprType type_of(const ExprPtr& e);

}  // namespace squery
