#pragma once

// Arithmetic expressions for initial data and numeric config values.
//
//   2*pi,  0.5*cos(x) + exp(-((x-pi)/0.3)^2),  sin(x)*sin(2*y)
//
// Operators + - * / ^ (right associative, binds tighter than unary minus),
// functions sin cos tan exp log sqrt abs tanh sinh cosh sech atan atan2 min
// max pow, constants pi and e.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epaut::cli {

class Expression
{
public:
  struct Node;

  /// Throws ValidationError naming the offending column.
  static Expression parse(std::string_view text, std::vector<std::string> variables = {});

  double operator()(std::span<const double> values) const;
  double evaluate() const { return (*this)(std::span<const double>{}); }

  /// True when some declared variable actually occurs.
  bool uses_variables() const noexcept { return uses_variables_; }
  const std::string& text() const noexcept { return text_; }

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  std::size_t arity_ = 0;
  bool uses_variables_ = false;
};

/// Evaluates a constant expression ("1e-3", "2*pi").
double evaluate_constant(std::string_view text);

}  // namespace epaut::cli
