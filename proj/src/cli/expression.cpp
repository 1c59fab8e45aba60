#include "epaut/cli/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "epaut/errors.hpp"

namespace epaut::cli {

struct Expression::Node
{
  enum class Op { number, variable, negate, add, sub, mul, div, pow, call };
  Op op = Op::number;
  double value = 0.0;
  std::size_t slot = 0;
  std::function<double(std::span<const double>)> fn;
  std::vector<std::unique_ptr<Node>> args;

  double eval(std::span<const double> v) const
  {
    switch (op) {
      case Op::number: return value;
      case Op::variable: return v[slot];
      case Op::negate: return -args[0]->eval(v);
      case Op::add: return args[0]->eval(v) + args[1]->eval(v);
      case Op::sub: return args[0]->eval(v) - args[1]->eval(v);
      case Op::mul: return args[0]->eval(v) * args[1]->eval(v);
      case Op::div: return args[0]->eval(v) / args[1]->eval(v);
      case Op::pow: return std::pow(args[0]->eval(v), args[1]->eval(v));
      case Op::call: {
        double a[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < args.size(); ++i) a[i] = args[i]->eval(v);
        return fn(std::span<const double>(a, args.size()));
      }
    }
    return 0.0;
  }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

struct Function
{
  std::size_t arity;
  std::function<double(std::span<const double>)> fn;
};

const std::map<std::string, Function, std::less<>>& functions()
{
  static const std::map<std::string, Function, std::less<>> table = [] {
    std::map<std::string, Function, std::less<>> t;
    auto unary = [&](const char* name, double (*f)(double)) {
      t[name] = {1, [f](std::span<const double> a) { return f(a[0]); }};
    };
    unary("sin", [](double x) { return std::sin(x); });
    unary("cos", [](double x) { return std::cos(x); });
    unary("tan", [](double x) { return std::tan(x); });
    unary("exp", [](double x) { return std::exp(x); });
    unary("log", [](double x) { return std::log(x); });
    unary("sqrt", [](double x) { return std::sqrt(x); });
    unary("abs", [](double x) { return std::abs(x); });
    unary("tanh", [](double x) { return std::tanh(x); });
    unary("sinh", [](double x) { return std::sinh(x); });
    unary("cosh", [](double x) { return std::cosh(x); });
    unary("sech", [](double x) { return 1.0 / std::cosh(x); });
    unary("atan", [](double x) { return std::atan(x); });
    t["atan2"] = {2, [](std::span<const double> a) { return std::atan2(a[0], a[1]); }};
    t["min"] = {2, [](std::span<const double> a) { return std::min(a[0], a[1]); }};
    t["max"] = {2, [](std::span<const double> a) { return std::max(a[0], a[1]); }};
    t["pow"] = {2, [](std::span<const double> a) { return std::pow(a[0], a[1]); }};
    return t;
  }();
  return table;
}

class Parser
{
public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  NodePtr parse()
  {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

  bool used_variables = false;

private:
  [[noreturn]] void fail(const std::string& what) const
  {
    throw ValidationError("expression '" + std::string(s_) + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  void skip()
  {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c)
  {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Node::Op op, NodePtr a = {}, NodePtr b = {})
  {
    auto n = std::make_unique<Node>();
    n->op = op;
    if (a) n->args.push_back(std::move(a));
    if (b) n->args.push_back(std::move(b));
    return n;
  }

  NodePtr expr()
  {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Node::Op::add, std::move(lhs), term());
      else if (accept('-')) lhs = make(Node::Op::sub, std::move(lhs), term());
      else return lhs;
    }
  }

  NodePtr term()
  {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Node::Op::mul, std::move(lhs), unary());
      else if (accept('/')) lhs = make(Node::Op::div, std::move(lhs), unary());
      else return lhs;
    }
  }

  NodePtr unary()
  {
    if (accept('-')) return make(Node::Op::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power()
  {
    auto base = primary();
    if (accept('^')) return make(Node::Op::pow, std::move(base), unary());
    return base;
  }

  NodePtr primary()
  {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number()
  {
    double v = 0.0;
    const auto* first = s_.data() + pos_;
    const auto [end, ec] = std::from_chars(first, s_.data() + s_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - first);
    auto n = make(Node::Op::number);
    n->value = v;
    return n;
  }

  NodePtr identifier()
  {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    if (accept('(')) {
      const auto it = functions().find(name);
      if (it == functions().end()) {
        pos_ = start;
        fail("unknown function '" + name + "'");
      }
      auto n = make(Node::Op::call);
      n->fn = it->second.fn;
      if (!accept(')')) {
        do n->args.push_back(expr());
        while (accept(','));
        if (!accept(')')) fail("expected ')'");
      }
      if (n->args.size() != it->second.arity)
        fail(name + " takes " + std::to_string(it->second.arity) + " argument(s)");
      return n;
    }
    const auto v = std::find(vars_.begin(), vars_.end(), name);
    if (v != vars_.end()) {
      used_variables = true;
      auto n = make(Node::Op::variable);
      n->slot = static_cast<std::size_t>(v - vars_.begin());
      return n;
    }
    auto n = make(Node::Op::number);
    if (name == "pi") n->value = std::numbers::pi;
    else if (name == "e") n->value = std::numbers::e;
    else {
      pos_ = start;
      fail("unknown name '" + name + "'");
    }
    return n;
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, std::vector<std::string> variables)
{
  Parser p(text, variables);
  Expression e;
  e.root_ = p.parse();
  e.text_ = std::string(text);
  e.arity_ = variables.size();
  e.uses_variables_ = p.used_variables;
  return e;
}

double Expression::operator()(std::span<const double> values) const
{
  if (values.size() != arity_)
    throw ValidationError("expression '" + text_ + "': expected " + std::to_string(arity_) + " values");
  return root_->eval(values);
}

double evaluate_constant(std::string_view text) { return Expression::parse(text).evaluate(); }

}  // namespace epaut::cli
