#pragma once

#include <functional>
#include <memory>
#include <string>

#include "opcert/common.hpp"
#include "opcert/deficiency.hpp"

namespace opcert {

struct ExprParseError : std::runtime_error {
  ExprParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (column " + std::to_string(pos + 1) + ")"), position(pos) {}
  size_t position;
};

// Whitelisted potential grammar: numbers, x, + - * / ^, unary minus,
// exp sin cos log abs sign sqrt, and piecewise(t1, v1, ..., default)
// meaning "v1 if x < t1, else ... else default".
class Expr {
 public:
  virtual ~Expr() = default;
  virtual double eval(double x) const = 0;
};

using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr parse_expression(const std::string& text);

// Convenience: parsed expression as a plain callable.
std::function<double(double)> compile_expression(const std::string& text);

// Operator expressions: "i_d_dx", "i_d_dx + <expr>", "-d2_dx2 + <expr>".
struct OperatorExpr {
  ContinuumKind kind;
  ExprPtr potential;  // null means zero potential
  std::string potential_label;
};

OperatorExpr parse_operator(const std::string& text);

// "a,b" with "-inf"/"inf" endpoints.
void parse_interval(const std::string& text, double& a, double& b);

}  // namespace opcert
