#include "lorentz/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace lorentz {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_node(ExprOp op, NodePtr a = nullptr, NodePtr b = nullptr, int pos = -1) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  n->pos = pos;
  return n;
}

[[noreturn]] void domain_error(const std::string& what, int pos) {
  std::ostringstream os;
  os << what;
  if (pos >= 0) os << " (subexpression at column " << pos << ")";
  fail(ErrorKind::domain, os.str());
}

}  // namespace

Expr Expr::constant(double c) {
  if (!std::isfinite(c)) fail(ErrorKind::bad_argument, "expression constant must be finite");
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::constant;
  n->value = c;
  return wrap(n);
}

Expr Expr::coord(int index) {
  if (index < 0 || index >= kMaxDim) fail(ErrorKind::bad_argument, "coordinate index out of range");
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::coord;
  n->index = index;
  return wrap(n);
}

int Expr::min_dim() const {
  if (!n_) return 0;
  int m = 0;
  auto walk = [&](auto&& self, const ExprNode* n) -> void {
    if (!n) return;
    if (n->op == ExprOp::coord) m = std::max(m, n->index + 1);
    self(self, n->a.get());
    self(self, n->b.get());
  };
  walk(walk, n_.get());
  return m;
}

bool Expr::depends_on(int index) const {
  bool found = false;
  auto walk = [&](auto&& self, const ExprNode* n) -> void {
    if (!n || found) return;
    if (n->op == ExprOp::coord && n->index == index) {
      found = true;
      return;
    }
    self(self, n->a.get());
    self(self, n->b.get());
  };
  walk(walk, n_.get());
  return found;
}

Expr Expr::substituted(const std::vector<Expr>& repl) const {
  auto walk = [&](auto&& self, const ExprNode* n) -> NodePtr {
    if (!n) return nullptr;
    if (n->op == ExprOp::coord) {
      if (n->index >= static_cast<int>(repl.size()) || !repl[n->index].valid())
        fail(ErrorKind::bad_argument, "substitution misses a referenced coordinate");
      return repl[n->index].share();
    }
    auto c = std::make_shared<ExprNode>(*n);
    c->a = self(self, n->a.get());
    c->b = self(self, n->b.get());
    return c;
  };
  return wrap(walk(walk, n_.get()));
}

namespace {

NodePtr require(const Expr& e) {
  if (!e.valid()) fail(ErrorKind::bad_argument, "empty expression");
  return e.share();
}

Expr binary(ExprOp op, const Expr& a, const Expr& b) {
  return Expr::wrap(make_node(op, require(a), require(b)));
}

Expr unary(ExprOp op, const Expr& a) { return Expr::wrap(make_node(op, require(a))); }

}  // namespace

Expr operator+(const Expr& a, const Expr& b) { return binary(ExprOp::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return binary(ExprOp::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return binary(ExprOp::mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return binary(ExprOp::div, a, b); }
Expr operator-(const Expr& a) { return unary(ExprOp::neg, a); }

Expr pow(const Expr& a, int k) {
  auto n = make_node(ExprOp::ipow, require(a));
  const_cast<ExprNode*>(n.get())->exponent = k;
  return Expr::wrap(n);
}

Expr exp(const Expr& a) { return unary(ExprOp::exp, a); }
Expr log(const Expr& a) { return unary(ExprOp::log, a); }
Expr sin(const Expr& a) { return unary(ExprOp::sin, a); }
Expr cos(const Expr& a) { return unary(ExprOp::cos, a); }
Expr sinh(const Expr& a) { return unary(ExprOp::sinh, a); }
Expr cosh(const Expr& a) { return unary(ExprOp::cosh, a); }
Expr tanh(const Expr& a) { return unary(ExprOp::tanh, a); }
Expr sqrt(const Expr& a) { return unary(ExprOp::sqrt, a); }

bool struct_eq(const Expr& a, const Expr& b) {
  auto walk = [](auto&& self, const ExprNode* x, const ExprNode* y) -> bool {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->op != y->op) return false;
    switch (x->op) {
      case ExprOp::constant:
        if (x->value != y->value) return false;
        break;
      case ExprOp::coord:
        if (x->index != y->index) return false;
        break;
      case ExprOp::ipow:
        if (x->exponent != y->exponent) return false;
        break;
      default:
        break;
    }
    return self(self, x->a.get(), y->a.get()) && self(self, x->b.get(), y->b.get());
  };
  return walk(walk, a.node(), b.node());
}

namespace {

const std::array<std::pair<const char*, ExprOp>, 8> kFunctions = {{
    {"exp", ExprOp::exp},
    {"log", ExprOp::log},
    {"sin", ExprOp::sin},
    {"cos", ExprOp::cos},
    {"sinh", ExprOp::sinh},
    {"cosh", ExprOp::cosh},
    {"tanh", ExprOp::tanh},
    {"sqrt", ExprOp::sqrt},
}};

struct Lexer {
  const std::string& src;
  size_t i = 0;

  void skip_space() {
    while (i < src.size() && std::isspace(static_cast<unsigned char>(src[i]))) ++i;
  }
  int column() const { return static_cast<int>(i) + 1; }
  char peek() {
    skip_space();
    return i < src.size() ? src[i] : '\0';
  }
};

[[noreturn]] void syntax_error(const Lexer& lx, const std::string& what) {
  std::ostringstream os;
  os << "syntax error at column " << lx.column() << ": " << what;
  fail(ErrorKind::parse, os.str());
}

struct Parser {
  Lexer lx;
  const std::vector<std::string>& coords;

  NodePtr parse() {
    NodePtr e = parse_sum();
    if (lx.peek() != '\0') syntax_error(lx, "unexpected trailing input");
    return e;
  }

  NodePtr parse_sum() {
    NodePtr e = parse_term();
    while (true) {
      char c = lx.peek();
      if (c != '+' && c != '-') return e;
      int pos = lx.column();
      ++lx.i;
      NodePtr rhs = parse_term();
      e = make_node(c == '+' ? ExprOp::add : ExprOp::sub, e, rhs, pos);
    }
  }

  NodePtr parse_term() {
    NodePtr e = parse_unary();
    while (true) {
      char c = lx.peek();
      if (c != '*' && c != '/') return e;
      int pos = lx.column();
      ++lx.i;
      NodePtr rhs = parse_unary();
      e = make_node(c == '*' ? ExprOp::mul : ExprOp::div, e, rhs, pos);
    }
  }

  NodePtr parse_unary() {
    if (lx.peek() == '-') {
      int pos = lx.column();
      ++lx.i;
      NodePtr e = parse_unary();
      // Negated literals fold so printed constants round-trip structurally.
      if (e->op == ExprOp::constant) {
        auto c = std::make_shared<ExprNode>(*e);
        c->value = -c->value;
        return c;
      }
      return make_node(ExprOp::neg, e, nullptr, pos);
    }
    return parse_postfix();
  }

  NodePtr parse_postfix() {
    NodePtr e = parse_atom();
    if (lx.peek() == '^') {
      int pos = lx.column();
      ++lx.i;
      auto n = make_node(ExprOp::ipow, e, nullptr, pos);
      const_cast<ExprNode*>(n.get())->exponent = parse_int_exponent();
      if (lx.peek() == '^') syntax_error(lx, "'^' does not chain; parenthesize the base");
      return n;
    }
    return e;
  }

  int parse_int_exponent() {
    lx.skip_space();
    size_t start = lx.i;
    if (lx.i < lx.src.size() && lx.src[lx.i] == '-') ++lx.i;
    size_t digits = lx.i;
    while (lx.i < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[lx.i]))) ++lx.i;
    if (lx.i == digits) {
      lx.i = start;
      syntax_error(lx, "expected integer exponent after '^'");
    }
    int v = 0;
    auto r = std::from_chars(lx.src.data() + start, lx.src.data() + lx.i, v);
    if (r.ec != std::errc()) {
      lx.i = start;
      syntax_error(lx, "integer exponent out of range");
    }
    return v;
  }

  NodePtr parse_atom() {
    char c = lx.peek();
    int pos = lx.column();
    if (c == '\0') syntax_error(lx, "unexpected end of input");
    if (c == '(') {
      ++lx.i;
      NodePtr e = parse_sum();
      if (lx.peek() != ')') syntax_error(lx, "expected ')'");
      ++lx.i;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number(pos);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_symbol(pos);
    syntax_error(lx, std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number(int pos) {
    size_t start = lx.i;
    while (lx.i < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[lx.i]))) ++lx.i;
    if (lx.i < lx.src.size() && lx.src[lx.i] == '.') {
      ++lx.i;
      while (lx.i < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[lx.i]))) ++lx.i;
    }
    if (lx.i < lx.src.size() && (lx.src[lx.i] == 'e' || lx.src[lx.i] == 'E')) {
      size_t mark = lx.i;
      ++lx.i;
      if (lx.i < lx.src.size() && (lx.src[lx.i] == '+' || lx.src[lx.i] == '-')) ++lx.i;
      size_t digits = lx.i;
      while (lx.i < lx.src.size() && std::isdigit(static_cast<unsigned char>(lx.src[lx.i]))) ++lx.i;
      if (lx.i == digits) lx.i = mark;  // 'e' belongs to a following symbol, back off
    }
    double v = 0.0;
    std::string text = lx.src.substr(start, lx.i - start);
    char* end = nullptr;
    v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(v)) {
      lx.i = start;
      syntax_error(lx, "malformed number '" + text + "'");
    }
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::constant;
    n->value = v;
    n->pos = pos;
    return n;
  }

  NodePtr parse_symbol(int pos) {
    size_t start = lx.i;
    while (lx.i < lx.src.size() &&
           (std::isalnum(static_cast<unsigned char>(lx.src[lx.i])) || lx.src[lx.i] == '_'))
      ++lx.i;
    std::string name = lx.src.substr(start, lx.i - start);
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (lx.peek() != '(') {
          std::ostringstream os;
          os << "syntax error at column " << pos << ": function '" << name
             << "' needs parenthesized argument";
          fail(ErrorKind::parse, os.str());
        }
        ++lx.i;
        NodePtr arg = parse_sum();
        if (lx.peek() != ')') syntax_error(lx, "expected ')'");
        ++lx.i;
        return make_node(op, arg, nullptr, pos);
      }
    }
    for (size_t k = 0; k < coords.size(); ++k) {
      if (coords[k] == name) {
        auto n = std::make_shared<ExprNode>();
        n->op = ExprOp::coord;
        n->index = static_cast<int>(k);
        n->pos = pos;
        return n;
      }
    }
    std::ostringstream os;
    os << "undeclared symbol '" << name << "' at column " << pos;
    fail(ErrorKind::undeclared_symbol, os.str());
  }
};

}  // namespace

bool is_reserved_word(const std::string& s) {
  for (const auto& [fname, op] : kFunctions) {
    (void)op;
    if (s == fname) return true;
  }
  return false;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Expr parse_expr(const std::string& src, const std::vector<std::string>& coords) {
  Parser p{Lexer{src}, coords};
  return Expr::wrap(p.parse());
}

namespace {

// Precedence: 1 add/sub, 2 mul/div, 3 neg, 4 ipow, 5 atoms.
int precedence(const ExprNode* n) {
  switch (n->op) {
    case ExprOp::add:
    case ExprOp::sub:
      return 1;
    case ExprOp::mul:
    case ExprOp::div:
      return 2;
    case ExprOp::neg:
      return 3;
    case ExprOp::ipow:
      return 4;
    case ExprOp::constant:
      return n->value < 0 ? 3 : 5;
    default:
      return 5;
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

const char* function_name(ExprOp op) {
  for (const auto& [fname, fop] : kFunctions)
    if (fop == op) return fname;
  return nullptr;
}

void print_node(std::ostringstream& os, const ExprNode* n, const std::vector<std::string>& coords);

void print_child(std::ostringstream& os, const ExprNode* n, const std::vector<std::string>& coords,
                 int min_prec) {
  if (precedence(n) < min_prec) {
    os << '(';
    print_node(os, n, coords);
    os << ')';
  } else {
    print_node(os, n, coords);
  }
}

void print_node(std::ostringstream& os, const ExprNode* n, const std::vector<std::string>& coords) {
  switch (n->op) {
    case ExprOp::constant:
      os << format_double(n->value);
      break;
    case ExprOp::coord:
      if (n->index < static_cast<int>(coords.size()))
        os << coords[n->index];
      else
        os << "#" << n->index;
      break;
    case ExprOp::add:
      print_child(os, n->a.get(), coords, 1);
      os << " + ";
      print_child(os, n->b.get(), coords, 2);
      break;
    case ExprOp::sub:
      print_child(os, n->a.get(), coords, 1);
      os << " - ";
      print_child(os, n->b.get(), coords, 2);
      break;
    case ExprOp::mul:
      print_child(os, n->a.get(), coords, 2);
      os << " * ";
      print_child(os, n->b.get(), coords, 3);
      break;
    case ExprOp::div:
      print_child(os, n->a.get(), coords, 2);
      os << " / ";
      print_child(os, n->b.get(), coords, 3);
      break;
    case ExprOp::neg:
      os << '-';
      print_child(os, n->a.get(), coords, 4);
      break;
    case ExprOp::ipow:
      print_child(os, n->a.get(), coords, 5);
      os << '^' << n->exponent;
      break;
    default: {
      os << function_name(n->op) << '(';
      print_node(os, n->a.get(), coords);
      os << ')';
      break;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e, const std::vector<std::string>& coords) {
  if (!e.valid()) return "";
  std::ostringstream os;
  print_node(os, e.node(), coords);
  return os.str();
}

namespace {

// Shims so the templated evaluator's unqualified calls resolve for plain
// doubles alongside the jet overloads found through ADL.
double exp(double x) { return std::exp(x); }
double log(double x) { return std::log(x); }
double sin(double x) { return std::sin(x); }
double cos(double x) { return std::cos(x); }
double sinh(double x) { return std::sinh(x); }
double cosh(double x) { return std::cosh(x); }
double tanh(double x) { return std::tanh(x); }
double sqrt(double x) { return std::sqrt(x); }
double pow(double x, int k) { return std::pow(x, k); }

template <class J>
struct Seed;

template <>
struct Seed<double> {
  static double constant(int, double c) { return c; }
  static double coordinate(int, int, double x) { return x; }
  static double value(double x) { return x; }
};

template <>
struct Seed<Jet1> {
  static Jet1 constant(int n, double c) { return Jet1::constant(n, c); }
  static Jet1 coordinate(int n, int i, double x) { return Jet1::coordinate(n, i, x); }
  static double value(const Jet1& j) { return j.v; }
};

template <>
struct Seed<Jet2> {
  static Jet2 constant(int n, double c) { return Jet2::constant(n, c); }
  static Jet2 coordinate(int n, int i, double x) { return Jet2::coordinate(n, i, x); }
  static double value(const Jet2& j) { return j.v; }
};

template <class J>
J eval_node(const ExprNode* n, const Vec& p, bool derivs) {
  const int dim = static_cast<int>(p.size());
  J out{};
  switch (n->op) {
    case ExprOp::constant:
      out = Seed<J>::constant(dim, n->value);
      break;
    case ExprOp::coord:
      if (n->index >= dim)
        fail(ErrorKind::bad_argument, "expression references coordinate index " +
                                          std::to_string(n->index) + " but the point has dimension " +
                                          std::to_string(dim));
      out = Seed<J>::coordinate(dim, n->index, p(n->index));
      break;
    case ExprOp::add:
      out = eval_node<J>(n->a.get(), p, derivs) + eval_node<J>(n->b.get(), p, derivs);
      break;
    case ExprOp::sub:
      out = eval_node<J>(n->a.get(), p, derivs) - eval_node<J>(n->b.get(), p, derivs);
      break;
    case ExprOp::mul:
      out = eval_node<J>(n->a.get(), p, derivs) * eval_node<J>(n->b.get(), p, derivs);
      break;
    case ExprOp::div: {
      J num = eval_node<J>(n->a.get(), p, derivs);
      J den = eval_node<J>(n->b.get(), p, derivs);
      if (Seed<J>::value(den) == 0.0) domain_error("division by zero", n->pos);
      out = num / den;
      break;
    }
    case ExprOp::neg:
      out = -eval_node<J>(n->a.get(), p, derivs);
      break;
    case ExprOp::ipow: {
      J base = eval_node<J>(n->a.get(), p, derivs);
      if (n->exponent < 0 && Seed<J>::value(base) == 0.0)
        domain_error("zero raised to a negative power", n->pos);
      out = pow(base, n->exponent);
      break;
    }
    case ExprOp::log: {
      J arg = eval_node<J>(n->a.get(), p, derivs);
      if (Seed<J>::value(arg) <= 0.0) domain_error("log of a non-positive value", n->pos);
      out = log(arg);
      break;
    }
    case ExprOp::sqrt: {
      J arg = eval_node<J>(n->a.get(), p, derivs);
      double v = Seed<J>::value(arg);
      if (v < 0.0 || (derivs && v == 0.0))
        domain_error("sqrt outside its differentiable domain", n->pos);
      out = sqrt(arg);
      break;
    }
    case ExprOp::exp:
      out = exp(eval_node<J>(n->a.get(), p, derivs));
      break;
    case ExprOp::sin:
      out = sin(eval_node<J>(n->a.get(), p, derivs));
      break;
    case ExprOp::cos:
      out = cos(eval_node<J>(n->a.get(), p, derivs));
      break;
    case ExprOp::sinh:
      out = sinh(eval_node<J>(n->a.get(), p, derivs));
      break;
    case ExprOp::cosh:
      out = cosh(eval_node<J>(n->a.get(), p, derivs));
      break;
    case ExprOp::tanh:
      out = tanh(eval_node<J>(n->a.get(), p, derivs));
      break;
  }
  if (!std::isfinite(Seed<J>::value(out))) domain_error("non-finite subexpression value", n->pos);
  return out;
}

const ExprNode* require_node(const Expr& e) {
  if (!e.valid()) fail(ErrorKind::bad_argument, "empty expression");
  return e.node();
}

}  // namespace

double eval(const Expr& e, const Vec& p) { return eval_node<double>(require_node(e), p, false); }

Jet1 eval_jet1(const Expr& e, const Vec& p) { return eval_node<Jet1>(require_node(e), p, true); }

Jet2 eval_jet2(const Expr& e, const Vec& p) { return eval_node<Jet2>(require_node(e), p, true); }

}  // namespace lorentz
