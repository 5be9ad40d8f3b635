#include "opcert/expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

namespace opcert {

namespace {

struct Num : Expr {
  double v;
  explicit Num(double v) : v(v) {}
  double eval(double) const override { return v; }
};

struct Var : Expr {
  double eval(double x) const override { return x; }
};

struct Unary : Expr {
  char op;
  ExprPtr a;
  Unary(char op, ExprPtr a) : op(op), a(std::move(a)) {}
  double eval(double x) const override { return -a->eval(x); }
};

struct Binary : Expr {
  char op;
  ExprPtr a, b;
  Binary(char op, ExprPtr a, ExprPtr b) : op(op), a(std::move(a)), b(std::move(b)) {}
  double eval(double x) const override {
    const double u = a->eval(x), v = b->eval(x);
    switch (op) {
      case '+': return u + v;
      case '-': return u - v;
      case '*': return u * v;
      case '/': return u / v;
      case '^': return std::pow(u, v);
    }
    return 0.0;
  }
};

struct Call : Expr {
  std::string name;
  ExprPtr a;
  Call(std::string name, ExprPtr a) : name(std::move(name)), a(std::move(a)) {}
  double eval(double x) const override {
    const double u = a->eval(x);
    if (name == "exp") return std::exp(u);
    if (name == "sin") return std::sin(u);
    if (name == "cos") return std::cos(u);
    if (name == "log") return std::log(u);
    if (name == "abs") return std::abs(u);
    if (name == "sqrt") return std::sqrt(u);
    if (name == "sign") return (u > 0.0) - (u < 0.0);
    return 0.0;
  }
};

struct Piecewise : Expr {
  std::vector<double> thresholds;
  std::vector<ExprPtr> values;  // size thresholds.size() + 1, last is default
  double eval(double x) const override {
    for (size_t i = 0; i < thresholds.size(); ++i)
      if (x < thresholds[i]) return values[i]->eval(x);
    return values.back()->eval(x);
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  ExprPtr parse() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ExprParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw ExprParseError(std::string("expected '") + c + "'", pos_);
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (accept('+'))
        e = std::make_shared<Binary>('+', e, term());
      else if (accept('-'))
        e = std::make_shared<Binary>('-', e, term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = factor();
    for (;;) {
      if (accept('*'))
        e = std::make_shared<Binary>('*', e, factor());
      else if (accept('/'))
        e = std::make_shared<Binary>('/', e, factor());
      else
        return e;
    }
  }

  // '^' binds tighter than unary minus: -x^2 parses as -(x^2)
  ExprPtr factor() {
    if (accept('-')) return std::make_shared<Unary>('-', factor());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    if (accept('^')) return std::make_shared<Binary>('^', base, factor());  // right assoc
    return base;
  }

  ExprPtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ExprParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ExprParseError("unexpected character", pos_);
  }

  ExprPtr number() {
    size_t end = pos_;
    while (end < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                               s_[end] == 'e' || s_[end] == 'E' ||
                               ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
                                (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
      ++end;
    try {
      const double v = std::stod(s_.substr(pos_, end - pos_));
      pos_ = end;
      return std::make_shared<Num>(v);
    } catch (...) {
      throw ExprParseError("malformed number", pos_);
    }
  }

  ExprPtr identifier() {
    size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_'))
      ++end;
    const std::string name = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (name == "x") return std::make_shared<Var>();
    if (name == "pi") return std::make_shared<Num>(M_PI);
    static const char* fns[] = {"exp", "sin", "cos", "log", "abs", "sqrt", "sign"};
    for (const char* f : fns)
      if (name == f) {
        expect('(');
        ExprPtr a = expr();
        expect(')');
        return std::make_shared<Call>(name, a);
      }
    if (name == "piecewise") {
      expect('(');
      auto pw = std::make_shared<Piecewise>();
      std::vector<ExprPtr> parts;
      parts.push_back(expr());
      while (accept(',')) parts.push_back(expr());
      expect(')');
      if (parts.size() % 2 == 0)
        throw ExprParseError("piecewise needs an odd number of arguments (t1, v1, ..., default)", pos_);
      for (size_t i = 0; i + 1 < parts.size(); i += 2) {
        pw->thresholds.push_back(parts[i]->eval(0.0));  // thresholds must be constants
        pw->values.push_back(parts[i + 1]);
      }
      pw->values.push_back(parts.back());
      return pw;
    }
    throw ExprParseError("unknown identifier '" + name + "'", pos_ - name.size());
  }
};

}  // namespace

ExprPtr parse_expression(const std::string& text) { return Parser(text).parse(); }

std::function<double(double)> compile_expression(const std::string& text) {
  ExprPtr e = parse_expression(text);
  return [e](double x) { return e->eval(x); };
}

OperatorExpr parse_operator(const std::string& text) {
  auto starts = [&](const std::string& tok) {
    size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (text.compare(i, tok.size(), tok) != 0) return std::string::npos;
    return i + tok.size();
  };
  OperatorExpr out;
  size_t rest = starts("i_d_dx");
  if (rest != std::string::npos) {
    out.kind = ContinuumKind::first_order_iddx_plus_f;
  } else {
    rest = starts("-d2_dx2");
    if (rest == std::string::npos)
      throw ExprParseError("operator must start with i_d_dx or -d2_dx2", 0);
    out.kind = ContinuumKind::sturm_liouville_minus_dxx_plus_V;
  }
  size_t i = rest;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i == text.size()) {
    out.potential = nullptr;
    out.potential_label = "0";
    return out;
  }
  if (text[i] != '+') throw ExprParseError("expected '+' before the potential", i);
  const std::string pot = text.substr(i + 1);
  out.potential = parse_expression(pot);
  out.potential_label = pot;
  // strip outer whitespace from the label
  while (!out.potential_label.empty() && std::isspace(static_cast<unsigned char>(out.potential_label.front())))
    out.potential_label.erase(out.potential_label.begin());
  while (!out.potential_label.empty() && std::isspace(static_cast<unsigned char>(out.potential_label.back())))
    out.potential_label.pop_back();
  return out;
}

void parse_interval(const std::string& text, double& a, double& b) {
  const size_t comma = text.find(',');
  if (comma == std::string::npos) throw ExprParseError("interval must be 'a,b'", 0);
  auto side = [](std::string s, size_t pos) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
      return std::stod(s);
    } catch (...) {
      throw ExprParseError("malformed interval endpoint '" + s + "'", pos);
    }
  };
  a = side(text.substr(0, comma), 0);
  b = side(text.substr(comma + 1), comma + 1);
  if (!(a < b)) throw ExprParseError("interval endpoints must satisfy a < b", 0);
}

}  // namespace opcert
