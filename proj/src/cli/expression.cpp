#include "setreg/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

namespace setreg {

struct Expression::Node {
  enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Op op = Op::Num;
  double value = 0.0;
  std::size_t var = 0;
  std::string fn;
  std::vector<std::unique_ptr<Node>> kids;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

const std::map<std::string, int>& arities() {
  static const std::map<std::string, int> a{
      {"abs", 1}, {"sqrt", 1}, {"exp", 1}, {"log", 1}, {"sin", 1},
      {"cos", 1}, {"tan", 1},  {"min", 2}, {"max", 2}, {"pow", 2}};
  return a;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExpressionError("formula '" + s_ + "' at offset " + std::to_string(pos_) + ": " +
                          what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->kids.push_back(std::move(a));
    n->kids.push_back(std::move(b));
    return n;
  }

  NodePtr expr() {
    auto n = term();
    while (true) {
      if (eat('+')) {
        n = binary(Node::Op::Add, std::move(n), term());
      } else if (eat('-')) {
        n = binary(Node::Op::Sub, std::move(n), term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    auto n = unary();
    while (true) {
      if (eat('*')) {
        n = binary(Node::Op::Mul, std::move(n), unary());
      } else if (eat('/')) {
        n = binary(Node::Op::Div, std::move(n), unary());
      } else {
        return n;
      }
    }
  }

  NodePtr unary() {
    if (eat('-')) {
      auto n = std::make_unique<Node>();
      n->op = Node::Op::Neg;
      n->kids.push_back(unary());
      return n;
    }
    if (eat('+')) return unary();
    return power();
  }

  // Right-associative; binds tighter than unary minus on its left.
  NodePtr power() {
    auto base = primary();
    if (eat('^')) return binary(Node::Op::Pow, std::move(base), unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (eat('(')) {
      auto n = expr();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_unique<Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        ++pos_;
      }
      const std::string id = s_.substr(start, pos_ - start);
      if (eat('(')) return call(id);
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == id) {
          auto n = std::make_unique<Node>();
          n->op = Node::Op::Var;
          n->var = i;
          return n;
        }
      }
      if (id == "pi") {
        auto n = std::make_unique<Node>();
        n->value = M_PI;
        return n;
      }
      fail("unknown variable '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr call(const std::string& id) {
    const auto it = arities().find(id);
    if (it == arities().end()) fail("unknown function '" + id + "'");
    auto n = std::make_unique<Node>();
    n->op = Node::Op::Call;
    n->fn = id;
    n->kids.push_back(expr());
    while (eat(',')) n->kids.push_back(expr());
    if (!eat(')')) fail("expected ')'");
    if (static_cast<int>(n->kids.size()) != it->second) {
      fail(id + " takes " + std::to_string(it->second) + " argument(s)");
    }
    return n;
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const std::vector<double>& v) {
  using Op = Node::Op;
  switch (n.op) {
    case Op::Num: return n.value;
    case Op::Var: return v[n.var];
    case Op::Neg: return -eval_node(*n.kids[0], v);
    case Op::Add: return eval_node(*n.kids[0], v) + eval_node(*n.kids[1], v);
    case Op::Sub: return eval_node(*n.kids[0], v) - eval_node(*n.kids[1], v);
    case Op::Mul: return eval_node(*n.kids[0], v) * eval_node(*n.kids[1], v);
    case Op::Div: return eval_node(*n.kids[0], v) / eval_node(*n.kids[1], v);
    case Op::Pow: return std::pow(eval_node(*n.kids[0], v), eval_node(*n.kids[1], v));
    case Op::Call: break;
  }
  const double a = eval_node(*n.kids[0], v);
  if (n.fn == "abs") return std::abs(a);
  if (n.fn == "sqrt") return std::sqrt(a);
  if (n.fn == "exp") return std::exp(a);
  if (n.fn == "log") return std::log(a);
  if (n.fn == "sin") return std::sin(a);
  if (n.fn == "cos") return std::cos(a);
  if (n.fn == "tan") return std::tan(a);
  const double b = eval_node(*n.kids[1], v);
  if (n.fn == "min") return std::min(a, b);
  if (n.fn == "max") return std::max(a, b);
  return std::pow(a, b);
}

}  // namespace

Expression::Expression(const std::string& text, std::vector<std::string> vars)
    : text_(text), vars_(std::move(vars)) {
  root_ = Parser(text_, vars_).parse();
}

Expression::~Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;

double Expression::eval(const std::vector<double>& values) const {
  if (values.size() != vars_.size()) {
    throw DimensionError("formula '" + text_ + "' expects " + std::to_string(vars_.size()) +
                         " values");
  }
  return eval_node(*root_, values);
}

}  // namespace setreg
