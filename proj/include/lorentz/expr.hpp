#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lorentz/jet.hpp"
#include "lorentz/types.hpp"

namespace lorentz {

enum class ExprOp {
  constant,
  coord,
  add,
  sub,
  mul,
  div,
  neg,
  ipow,
  exp,
  log,
  sin,
  cos,
  sinh,
  cosh,
  tanh,
  sqrt,
};

struct ExprNode {
  ExprOp op;
  double value = 0.0;  // constant payload
  int index = -1;      // coord payload
  int exponent = 0;    // ipow payload
  std::shared_ptr<const ExprNode> a;
  std::shared_ptr<const ExprNode> b;
  int pos = -1;  // column in parsed source, -1 for built trees
};

// Immutable scalar expression over chart coordinates. Coordinates are
// referenced by index; charts own the name list.
class Expr {
 public:
  Expr() = default;

  static Expr constant(double c);
  static Expr coord(int index);

  bool valid() const { return n_ != nullptr; }
  const ExprNode* node() const { return n_.get(); }
  std::shared_ptr<const ExprNode> share() const { return n_; }

  // Largest referenced coordinate index plus one.
  int min_dim() const;
  bool depends_on(int index) const;

  // Replaces coord(i) with repl[i]. Every referenced index must have a
  // replacement.
  Expr substituted(const std::vector<Expr>& repl) const;

  static Expr wrap(std::shared_ptr<const ExprNode> n) {
    Expr e;
    e.n_ = std::move(n);
    return e;
  }

 private:
  std::shared_ptr<const ExprNode> n_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int k);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sinh(const Expr& a);
Expr cosh(const Expr& a);
Expr tanh(const Expr& a);
Expr sqrt(const Expr& a);

bool struct_eq(const Expr& a, const Expr& b);

// Parses the grammar documented in the README. Coordinates resolve against
// `coords`; anything else is an undeclared-symbol error. Syntax errors carry
// the 1-based source column.
Expr parse_expr(const std::string& src, const std::vector<std::string>& coords);

// Prints with minimal parentheses; parsing the result gives back a
// structurally equal tree.
std::string to_string(const Expr& e, const std::vector<std::string>& coords);

bool is_reserved_word(const std::string& s);
bool is_identifier(const std::string& s);

double eval(const Expr& e, const Vec& p);
Jet1 eval_jet1(const Expr& e, const Vec& p);
Jet2 eval_jet2(const Expr& e, const Vec& p);

}  // namespace lorentz
