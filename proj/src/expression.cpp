#include "malab/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "malab/error.hpp"

namespace malab {

struct Expression::Node {
  enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Op op = Op::Const;
  double value = 0.0;
  char var = 0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make(Op op, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != src_.size()) error("unexpected '" + std::string(1, src_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::Configuration, "expression \"" + std::string(src_) + "\" at " +
                                       std::to_string(pos_) + ": " + msg);
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+')) lhs = make(Op::Add, {lhs, term()});
      else if (eat('-')) lhs = make(Op::Sub, {lhs, term()});
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*')) lhs = make(Op::Mul, {lhs, unary()});
      else if (eat('/')) lhs = make(Op::Div, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::Neg, {unary()});
    if (eat('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (eat('^')) return make(Op::Pow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= src_.size()) error("unexpected end of input");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (eat('(')) {
      auto n = expr();
      if (!eat(')')) error("expected ')'");
      return n;
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) error("bad number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->op = Op::Const;
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    skip();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      std::vector<NodePtr> args;
      if (!eat(')')) {
        do {
          args.push_back(expr());
        } while (eat(','));
        if (!eat(')')) error("expected ')' after arguments of " + name);
      }
      static const std::vector<std::pair<std::string, std::size_t>> known = {
          {"sin", 1},  {"cos", 1}, {"tan", 1}, {"exp", 1}, {"log", 1},
          {"sqrt", 1}, {"abs", 1}, {"tanh", 1}, {"min", 2}, {"max", 2}, {"step", 2}};
      bool found = false;
      for (const auto& [fn, arity] : known) {
        if (fn == name) {
          if (args.size() != arity) error(name + " expects " + std::to_string(arity) + " argument(s)");
          found = true;
        }
      }
      if (!found) error("unknown function " + name);
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Call;
      n->fn = name;
      n->args = std::move(args);
      return n;
    }
    auto n = std::make_shared<Expression::Node>();
    if (name == "pi") {
      n->op = Op::Const;
      n->value = std::numbers::pi;
    } else if (name == "e") {
      n->op = Op::Const;
      n->value = std::numbers::e;
    } else if (name == "x" || name == "y" || name == "z" || name == "h" || name == "r") {
      n->op = Op::Var;
      n->var = name[0];
    } else {
      error("unknown identifier " + name);
    }
    return n;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, const ExprVars& v) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:
      switch (n.var) {
        case 'x': return v.x;
        case 'y': return v.y;
        case 'z': return v.z;
        case 'h': return v.h;
        default: return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z);
      }
    case Op::Neg: return -eval(*n.args[0], v);
    case Op::Add: return eval(*n.args[0], v) + eval(*n.args[1], v);
    case Op::Sub: return eval(*n.args[0], v) - eval(*n.args[1], v);
    case Op::Mul: return eval(*n.args[0], v) * eval(*n.args[1], v);
    case Op::Div: return eval(*n.args[0], v) / eval(*n.args[1], v);
    case Op::Pow: return std::pow(eval(*n.args[0], v), eval(*n.args[1], v));
    case Op::Call: {
      double a = eval(*n.args[0], v);
      const std::string& f = n.fn;
      if (f == "sin") return std::sin(a);
      if (f == "cos") return std::cos(a);
      if (f == "tan") return std::tan(a);
      if (f == "exp") return std::exp(a);
      if (f == "log") return std::log(a);
      if (f == "sqrt") return std::sqrt(a);
      if (f == "abs") return std::abs(a);
      if (f == "tanh") return std::tanh(a);
      double b = eval(*n.args[1], v);
      if (f == "min") return std::min(a, b);
      if (f == "max") return std::max(a, b);
      return 0.5 * (1.0 + std::tanh(a / b));  // step
    }
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view source) {
  Expression e;
  e.source_ = std::string(source);
  e.root_ = Parser(source).parse();
  return e;
}

double Expression::operator()(const ExprVars& vars) const { return eval(*root_, vars); }

}  // namespace malab
