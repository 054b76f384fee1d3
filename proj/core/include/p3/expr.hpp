#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

// Expression trees over the variables x1, x2, x3 and named parameters.
// Immutable: every operation returns a new tree, subtrees are shared.

namespace p3 {

using Vec3 = std::array<double, 3>;
using Params = std::map<std::string, double>;

enum class Op {
  Number, Var, Param,
  Neg, Sin, Cos, Tan, Sec, Cot, Exp, Ln, Sqrt,
  Add, Sub, Mul, Div, Pow,
};

bool is_unary(Op op);
bool is_binary(Op op);

class Expression;

struct ExprNode {
  Op op;
  double value = 0.0;        // Number
  int var = 0;               // Var, 1-based axis
  std::string name;          // Param
  std::shared_ptr<const ExprNode> a, b;
};

class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}

  bool empty() const { return node_ == nullptr; }
  const ExprNode& ref() const {
    if (!node_) throw std::logic_error("empty expression");
    return *node_;
  }
  const std::shared_ptr<const ExprNode>& node() const { return node_; }

  Op op() const { return ref().op; }
  Expression child_a() const { return Expression(ref().a); }
  Expression child_b() const { return Expression(ref().b); }

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& what);
  int line, col;
};

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// -- construction -----------------------------------------------------------

Expression num(double v);
Expression var(int axis);                 // 1..3
Expression param(const std::string& name);
Expression make_unary(Op op, Expression a);
Expression make_binary(Op op, Expression a, Expression b);

// Folding builders: apply cheap, domain-preserving identities (0/1 units,
// constant folding, x-x, u*w/w) while constructing. diff() and
// simplify_light() build through these.
Expression fneg(Expression a);
Expression fadd(Expression a, Expression b);
Expression fsub(Expression a, Expression b);
Expression fmul(Expression a, Expression b);
Expression fdiv(Expression a, Expression b);
Expression fpow(Expression a, Expression b);
Expression ffun(Op op, Expression a);

// Operator sugar (folding) for building catalog expressions.
inline Expression operator-(Expression a) { return fneg(std::move(a)); }
inline Expression operator+(Expression a, Expression b) { return fadd(std::move(a), std::move(b)); }
inline Expression operator-(Expression a, Expression b) { return fsub(std::move(a), std::move(b)); }
inline Expression operator*(Expression a, Expression b) { return fmul(std::move(a), std::move(b)); }
inline Expression operator/(Expression a, Expression b) { return fdiv(std::move(a), std::move(b)); }
inline Expression operator+(Expression a, double b) { return fadd(std::move(a), num(b)); }
inline Expression operator+(double a, Expression b) { return fadd(num(a), std::move(b)); }
inline Expression operator-(Expression a, double b) { return fsub(std::move(a), num(b)); }
inline Expression operator-(double a, Expression b) { return fsub(num(a), std::move(b)); }
inline Expression operator*(Expression a, double b) { return fmul(std::move(a), num(b)); }
inline Expression operator*(double a, Expression b) { return fmul(num(a), std::move(b)); }
inline Expression operator/(Expression a, double b) { return fdiv(std::move(a), num(b)); }
inline Expression operator/(double a, Expression b) { return fdiv(num(a), std::move(b)); }
inline Expression pow(Expression a, Expression b) { return fpow(std::move(a), std::move(b)); }
inline Expression pow(Expression a, double b) { return fpow(std::move(a), num(b)); }
inline Expression sin(Expression a) { return ffun(Op::Sin, std::move(a)); }
inline Expression cos(Expression a) { return ffun(Op::Cos, std::move(a)); }
inline Expression tan(Expression a) { return ffun(Op::Tan, std::move(a)); }
inline Expression sec(Expression a) { return ffun(Op::Sec, std::move(a)); }
inline Expression cot(Expression a) { return ffun(Op::Cot, std::move(a)); }
inline Expression exp(Expression a) { return ffun(Op::Exp, std::move(a)); }
inline Expression ln(Expression a) { return ffun(Op::Ln, std::move(a)); }
inline Expression sqrt(Expression a) { return ffun(Op::Sqrt, std::move(a)); }

// -- operations --------------------------------------------------------------

// Text in/out.  parse accepts the surface grammar ('#' comments, identifiers
// [A-Za-z][A-Za-z0-9_]*, ^ right-associative above unary minus above * /
// above + -); to_string prints minimal parentheses such that
// parse(to_string(e)) reproduces e node for node.
Expression parse(const std::string& text);
std::string to_string(const Expression& e);
std::string format_number(double v);  // shortest exact round-trip form

// Numeric evaluation. Throws EvalError on division by zero, ln of a
// non-positive or sqrt of a negative argument, sec/tan/cot poles, unbound
// parameters, fractional powers of negative bases (unless the exponent snaps
// to p/q with odd q <= 64), and non-finite intermediates. The message names
// the offending subterm and the point.
double eval(const Expression& e, const Vec3& x, const Params& params = {});

// Exact partial derivative with respect to x<axis>, axis in 1..3.
Expression diff(const Expression& e, int axis);
// Exact partial derivative with respect to a named parameter (used for the
// slot arguments of rescaling functions F(H,C)).
Expression diff_param(const Expression& e, const std::string& name);

// Identity folding + constant folding; semantics preserved at every point
// where the input evaluates.
Expression simplify_light(const Expression& e);

// Replace parameter references by expressions.
Expression substitute_params(const Expression& e,
                             const std::map<std::string, Expression>& subs);

std::set<std::string> free_params(const Expression& e);

// Node-for-node equality (numbers compared bitwise-exactly).
bool equal_structure(const Expression& a, const Expression& b);

}  // namespace p3
