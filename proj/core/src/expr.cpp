#include "p3/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

namespace p3 {

bool is_unary(Op op) { return op >= Op::Neg && op <= Op::Sqrt; }
bool is_binary(Op op) { return op >= Op::Add; }

ParseError::ParseError(int line_, int col_, const std::string& what)
    : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                         std::to_string(col_) + ": " + what),
      line(line_), col(col_) {}

namespace {

Expression wrap(ExprNode n) {
  return Expression(std::make_shared<const ExprNode>(std::move(n)));
}

bool is_num(const Expression& e, double v) {
  return !e.empty() && e.ref().op == Op::Number && e.ref().value == v;
}

bool is_const(const Expression& e) { return e.ref().op == Op::Number; }

// Exponent values that count as integers for pow domain rules.
bool integer_valued(double c) {
  return std::nearbyint(c) == c && std::fabs(c) < 1e15;
}

// Snap c to p/q with q <= 64 (continued fractions). Needed so that constant
// rational exponents like 1/3 act on negative bases.
bool rational_snap(double c, long long& p, long long& q) {
  double x = c;
  long long p0 = 1, q0 = 0, p1 = 0, q1 = 1;  // convergents of |x|
  double ax = std::fabs(x);
  for (int it = 0; it < 32; ++it) {
    double fl = std::floor(ax);
    if (fl > 1e15) return false;
    long long a = (long long)fl;
    long long p2 = a * p0 + p1, q2 = a * q0 + q1;
    if (q2 > 64) return false;
    p1 = p0; q1 = q0; p0 = p2; q0 = q2;
    if (q0 != 0 && std::fabs(std::fabs(c) - (double)p0 / (double)q0) < 1e-9) {
      p = (c < 0 ? -p0 : p0);
      q = q0;
      return true;
    }
    double frac = ax - fl;
    if (frac < 1e-12) return false;
    ax = 1.0 / frac;
  }
  return false;
}

}  // namespace

Expression num(double v) {
  ExprNode n;
  n.op = Op::Number;
  n.value = v;
  return wrap(std::move(n));
}

Expression var(int axis) {
  if (axis < 1 || axis > 3) throw std::logic_error("variable axis out of range");
  ExprNode n;
  n.op = Op::Var;
  n.var = axis;
  return wrap(std::move(n));
}

Expression param(const std::string& name) {
  ExprNode n;
  n.op = Op::Param;
  n.name = name;
  return wrap(std::move(n));
}

Expression make_unary(Op op, Expression a) {
  if (!is_unary(op)) throw std::logic_error("not a unary op");
  // Normalize a negated literal into a signed literal so that parse/print
  // round-trips are node-exact.
  if (op == Op::Neg && a.ref().op == Op::Number) return num(-a.ref().value);
  ExprNode n;
  n.op = op;
  n.a = a.node();
  return wrap(std::move(n));
}

Expression make_binary(Op op, Expression a, Expression b) {
  if (!is_binary(op)) throw std::logic_error("not a binary op");
  ExprNode n;
  n.op = op;
  n.a = a.node();
  n.b = b.node();
  return wrap(std::move(n));
}

// -- folding builders ---------------------------------------------------------

namespace {

// Fold a constant subtree if it evaluates cleanly; otherwise keep it symbolic
// so the domain error still surfaces at eval time.
Expression try_fold(Expression e) {
  try {
    double v = eval(e, {0, 0, 0});
    if (std::isfinite(v)) return num(v);
  } catch (const EvalError&) {
  }
  return e;
}

bool both_const(const Expression& a, const Expression& b) {
  return is_const(a) && is_const(b);
}

}  // namespace

Expression fneg(Expression a) {
  if (a.ref().op == Op::Number) return num(-a.ref().value);
  if (a.ref().op == Op::Neg) return a.child_a();
  return make_unary(Op::Neg, std::move(a));
}

Expression fadd(Expression a, Expression b) {
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (both_const(a, b)) return try_fold(make_binary(Op::Add, a, b));
  return make_binary(Op::Add, std::move(a), std::move(b));
}

Expression fsub(Expression a, Expression b) {
  if (is_num(b, 0)) return a;
  if (is_num(a, 0)) return fneg(std::move(b));
  if (equal_structure(a, b)) return num(0);
  if (both_const(a, b)) return try_fold(make_binary(Op::Sub, a, b));
  return make_binary(Op::Sub, std::move(a), std::move(b));
}

Expression fmul(Expression a, Expression b) {
  if (is_num(a, 0) || is_num(b, 0)) return num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (both_const(a, b)) return try_fold(make_binary(Op::Mul, a, b));
  return make_binary(Op::Mul, std::move(a), std::move(b));
}

Expression fdiv(Expression a, Expression b) {
  if (is_num(b, 1)) return a;
  if (is_num(a, 0) && !is_num(b, 0)) return num(0);
  if (equal_structure(a, b) && !is_num(b, 0)) return num(1);
  // (u*w)/w -> u and (w*u)/w -> u: same domain, w must evaluate either way.
  if (a.ref().op == Op::Mul) {
    Expression u = a.child_a(), w = a.child_b();
    if (equal_structure(w, b)) return u;
    if (equal_structure(u, b)) return w;
  }
  if (both_const(a, b)) return try_fold(make_binary(Op::Div, a, b));
  return make_binary(Op::Div, std::move(a), std::move(b));
}

Expression fpow(Expression a, Expression b) {
  if (is_num(b, 1)) return a;
  if (is_num(b, 0)) return num(1);  // pow(x, 0) == 1, matching eval
  if (is_num(a, 1)) return num(1);
  if (both_const(a, b)) return try_fold(make_binary(Op::Pow, a, b));
  return make_binary(Op::Pow, std::move(a), std::move(b));
}

Expression ffun(Op op, Expression a) {
  if (op == Op::Neg) return fneg(std::move(a));
  if (is_const(a)) return try_fold(make_unary(op, a));
  return make_unary(op, std::move(a));
}

// -- evaluation ---------------------------------------------------------------

namespace {

struct EvalCtx {
  const Vec3& x;
  const Params& params;
};

[[noreturn]] void eval_fail(const ExprNode& n, const EvalCtx& c, const std::string& why) {
  std::ostringstream os;
  os << why << " in subterm '" << to_string(Expression(std::make_shared<const ExprNode>(n)))
     << "' at point (" << format_number(c.x[0]) << ", " << format_number(c.x[1])
     << ", " << format_number(c.x[2]) << ")";
  throw EvalError(os.str());
}

double eval_node(const ExprNode& n, const EvalCtx& c) {
  switch (n.op) {
    case Op::Number: return n.value;
    case Op::Var: return c.x[n.var - 1];
    case Op::Param: {
      auto it = c.params.find(n.name);
      if (it == c.params.end()) eval_fail(n, c, "unbound parameter '" + n.name + "'");
      return it->second;
    }
    default: break;
  }
  double a = eval_node(*n.a, c);
  double r = 0;
  switch (n.op) {
    case Op::Neg: r = -a; break;
    case Op::Sin: r = std::sin(a); break;
    case Op::Cos: r = std::cos(a); break;
    case Op::Tan:
      if (std::cos(a) == 0.0) eval_fail(n, c, "tan pole");
      r = std::tan(a);
      break;
    case Op::Sec: {
      double ca = std::cos(a);
      if (ca == 0.0) eval_fail(n, c, "sec pole");
      r = 1.0 / ca;
      break;
    }
    case Op::Cot: {
      double sa = std::sin(a);
      if (sa == 0.0) eval_fail(n, c, "cot pole");
      r = std::cos(a) / sa;
      break;
    }
    case Op::Exp: r = std::exp(a); break;
    case Op::Ln:
      if (a <= 0.0) eval_fail(n, c, "ln of non-positive argument");
      r = std::log(a);
      break;
    case Op::Sqrt:
      if (a < 0.0) eval_fail(n, c, "sqrt of negative argument");
      r = std::sqrt(a);
      break;
    default: {
      double b = eval_node(*n.b, c);
      switch (n.op) {
        case Op::Add: r = a + b; break;
        case Op::Sub: r = a - b; break;
        case Op::Mul: r = a * b; break;
        case Op::Div:
          if (b == 0.0) eval_fail(n, c, "division by zero");
          r = a / b;
          break;
        case Op::Pow: {
          if (a > 0.0) {
            r = std::pow(a, b);
          } else if (integer_valued(b)) {
            if (a == 0.0 && b <= 0.0) eval_fail(n, c, "zero base with non-positive exponent");
            r = std::pow(a, b);
          } else if (a == 0.0) {
            r = 0.0;  // b > 0 and fractional
          } else {
            long long p, q;
            if (!rational_snap(b, p, q) || q % 2 == 0)
              eval_fail(n, c, "fractional power of negative base");
            double m = std::pow(-a, b);
            r = (p % 2 == 0) ? m : -m;
          }
          break;
        }
        default: throw std::logic_error("bad op");
      }
    }
  }
  if (!std::isfinite(r)) eval_fail(n, c, "non-finite result");
  return r;
}

}  // namespace

double eval(const Expression& e, const Vec3& x, const Params& params) {
  EvalCtx c{x, params};
  return eval_node(e.ref(), c);
}

// -- differentiation ----------------------------------------------------------

namespace {

// Derivative with respect to either an axis (name empty) or a parameter.
Expression diff_rec(const Expression& e, int axis, const std::string& name) {
  const ExprNode& n = e.ref();
  auto d = [&](const Expression& u) { return diff_rec(u, axis, name); };
  switch (n.op) {
    case Op::Number: return num(0);
    case Op::Var: return num(name.empty() && n.var == axis ? 1 : 0);
    case Op::Param: return num(!name.empty() && n.name == name ? 1 : 0);
    case Op::Neg: return fneg(d(e.child_a()));
    case Op::Sin: return fmul(cos(e.child_a()), d(e.child_a()));
    case Op::Cos: return fneg(fmul(sin(e.child_a()), d(e.child_a())));
    case Op::Tan: return fmul(fpow(sec(e.child_a()), num(2)), d(e.child_a()));
    case Op::Sec:
      return fmul(fmul(sec(e.child_a()), tan(e.child_a())), d(e.child_a()));
    case Op::Cot:
      return fneg(fmul(fadd(num(1), fpow(cot(e.child_a()), num(2))), d(e.child_a())));
    case Op::Exp: return fmul(exp(e.child_a()), d(e.child_a()));
    case Op::Ln: return fdiv(d(e.child_a()), e.child_a());
    case Op::Sqrt: return fdiv(d(e.child_a()), fmul(num(2), sqrt(e.child_a())));
    case Op::Add: return fadd(d(e.child_a()), d(e.child_b()));
    case Op::Sub: return fsub(d(e.child_a()), d(e.child_b()));
    case Op::Mul: {
      Expression u = e.child_a(), v = e.child_b();
      return fadd(fmul(d(u), v), fmul(u, d(v)));
    }
    case Op::Div: {
      Expression u = e.child_a(), v = e.child_b();
      return fdiv(fsub(fmul(d(u), v), fmul(u, d(v))), fpow(v, num(2)));
    }
    case Op::Pow: {
      Expression u = e.child_a(), v = e.child_b();
      if (is_const(v)) {
        double c = v.ref().value;
        return fmul(fmul(v, fpow(u, num(c - 1))), d(u));
      }
      // u^v = exp(v ln u); valid on positive bases, which is the only domain
      // where a non-constant exponent evaluates anyway.
      return fmul(fpow(u, v), fadd(fmul(d(v), ln(u)), fdiv(fmul(v, d(u)), u)));
    }
  }
  throw std::logic_error("bad op");
}

}  // namespace

Expression diff(const Expression& e, int axis) {
  if (axis < 1 || axis > 3) throw std::logic_error("diff axis out of range");
  return diff_rec(e, axis, "");
}

Expression diff_param(const Expression& e, const std::string& name) {
  return diff_rec(e, 0, name);
}

// -- simplify / substitute / params -------------------------------------------

Expression simplify_light(const Expression& e) {
  const ExprNode& n = e.ref();
  if (is_unary(n.op)) {
    Expression a = simplify_light(e.child_a());
    return n.op == Op::Neg ? fneg(std::move(a)) : ffun(n.op, std::move(a));
  }
  if (is_binary(n.op)) {
    Expression a = simplify_light(e.child_a());
    Expression b = simplify_light(e.child_b());
    switch (n.op) {
      case Op::Add: return fadd(std::move(a), std::move(b));
      case Op::Sub: return fsub(std::move(a), std::move(b));
      case Op::Mul: return fmul(std::move(a), std::move(b));
      case Op::Div: return fdiv(std::move(a), std::move(b));
      default: return fpow(std::move(a), std::move(b));
    }
  }
  return e;
}

Expression substitute_params(const Expression& e,
                             const std::map<std::string, Expression>& subs) {
  const ExprNode& n = e.ref();
  if (n.op == Op::Param) {
    auto it = subs.find(n.name);
    return it == subs.end() ? e : it->second;
  }
  if (is_unary(n.op)) return make_unary(n.op, substitute_params(e.child_a(), subs));
  if (is_binary(n.op))
    return make_binary(n.op, substitute_params(e.child_a(), subs),
                       substitute_params(e.child_b(), subs));
  return e;
}

namespace {
void collect_params(const ExprNode& n, std::set<std::string>& out) {
  if (n.op == Op::Param) out.insert(n.name);
  if (n.a) collect_params(*n.a, out);
  if (n.b) collect_params(*n.b, out);
}
}  // namespace

std::set<std::string> free_params(const Expression& e) {
  std::set<std::string> out;
  collect_params(e.ref(), out);
  return out;
}

bool equal_structure(const Expression& a, const Expression& b) {
  if (a.node() == b.node()) return true;
  const ExprNode& x = a.ref();
  const ExprNode& y = b.ref();
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::Number: {
      // bitwise so that 0.0 and -0.0 stay distinct (they print differently)
      return std::memcmp(&x.value, &y.value, sizeof(double)) == 0;
    }
    case Op::Var: return x.var == y.var;
    case Op::Param: return x.name == y.name;
    default: break;
  }
  if (is_unary(x.op)) return equal_structure(a.child_a(), b.child_a());
  return equal_structure(a.child_a(), b.child_a()) &&
         equal_structure(a.child_b(), b.child_b());
}

// -- printing -----------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

const char* fun_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Sec: return "sec";
    case Op::Cot: return "cot";
    case Op::Exp: return "exp";
    case Op::Ln: return "ln";
    case Op::Sqrt: return "sqrt";
    default: return nullptr;
  }
}

// Precedence: + - (1), * / (2), unary minus (3), ^ (4), atoms (5).
// Negative literals print with a leading '-', so they rank like unary minus.
int prec(const ExprNode& n) {
  switch (n.op) {
    case Op::Add: case Op::Sub: return 1;
    case Op::Mul: case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Number: return n.value < 0 ? 3 : 5;
    default: return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

// Parenthesize child when its precedence is below what the slot requires.
void print_child(const ExprNode& c, int min_prec, std::string& out) {
  if (prec(c) < min_prec) {
    out += '(';
    print_node(c, out);
    out += ')';
  } else {
    print_node(c, out);
  }
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.op) {
    case Op::Number: out += format_number(n.value); return;
    case Op::Var: out += 'x'; out += char('0' + n.var); return;
    case Op::Param: out += n.name; return;
    case Op::Neg:
      out += '-';
      print_child(*n.a, 3, out);
      return;
    case Op::Add:
      print_child(*n.a, 1, out);
      out += '+';
      print_child(*n.b, 2, out);  // right +/- would re-associate
      return;
    case Op::Sub:
      print_child(*n.a, 1, out);
      out += '-';
      print_child(*n.b, 2, out);
      return;
    case Op::Mul:
      print_child(*n.a, 2, out);
      out += '*';
      print_child(*n.b, 3, out);  // right * / would re-associate
      return;
    case Op::Div:
      print_child(*n.a, 2, out);
      out += '/';
      print_child(*n.b, 3, out);
      return;
    case Op::Pow:
      print_child(*n.a, 5, out);  // grammar: base of ^ is an atom
      out += '^';
      print_child(*n.b, 3, out);  // exponent may carry unary minus / nested ^
      return;
    default: {
      out += fun_name(n.op);
      out += '(';
      print_node(*n.a, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expression& e) {
  std::string out;
  print_node(e.ref(), out);
  return out;
}

}  // namespace p3
