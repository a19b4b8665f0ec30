#pragma once

#include <memory>
#include <string>
#include <vector>

#include "setreg/metric.hpp"

namespace setreg {

class ExpressionError : public Error {
 public:
  using Error::Error;
};

/// Arithmetic formula over named scalar variables: + - * / ^, unary minus,
/// parentheses, numbers, and abs sqrt exp log sin cos tan min max pow.
class Expression {
 public:
  struct Node;

  /// Parses `text`; every identifier must be a function or one of `vars`.
  Expression(const std::string& text, std::vector<std::string> vars);
  ~Expression();
  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;

  /// values[i] is the value of vars[i].
  double eval(const std::vector<double>& values) const;
  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return vars_; }

 private:
  std::string text_;
  std::vector<std::string> vars_;
  std::unique_ptr<Node> root_;
};

}  // namespace setreg
