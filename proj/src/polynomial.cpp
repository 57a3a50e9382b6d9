#include "bcsynth/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace bcsynth {

Monomial Monomial::operator*(const Monomial& other) const {
  if (dimension() != other.dimension()) throw std::invalid_argument("monomial dimension mismatch");
  std::vector<int> e(exps_);
  for (int i = 0; i < dimension(); ++i) e[i] += other.exps_[i];
  return Monomial(std::move(e));
}

bool Monomial::operator<(const Monomial& other) const {
  if (dimension() != other.dimension()) throw std::invalid_argument("monomial dimension mismatch");
  int da = degree(), db = other.degree();
  if (da != db) return da < db;
  // Within a grade, larger leading exponents come first: x1^2 < x1*x2 < x2^2
  // as map keys, so iteration lists x1-heavy monomials before x2-heavy ones.
  return exps_ > other.exps_;
}

Polynomial::Polynomial(std::vector<std::string> variables, std::map<Monomial, double> terms)
    : vars_(std::move(variables)) {
  for (auto& [m, c] : terms) {
    if (m.dimension() != dimension()) throw std::invalid_argument("term dimension mismatch");
    add_term(m, c);
  }
}

Polynomial Polynomial::constant(std::vector<std::string> variables, double value) {
  Polynomial p(std::move(variables));
  p.add_term(Monomial::one(p.dimension()), value);
  return p;
}

Polynomial Polynomial::variable(std::vector<std::string> variables, int index) {
  Polynomial p(std::move(variables));
  p.add_term(Monomial::var(p.dimension(), index), 1.0);
  return p;
}

Polynomial Polynomial::from_monomial(std::vector<std::string> variables, const Monomial& m,
                                     double coeff) {
  Polynomial p(std::move(variables));
  if (m.dimension() != p.dimension()) throw std::invalid_argument("monomial dimension mismatch");
  p.add_term(m, coeff);
  return p;
}

int Polynomial::degree() const {
  if (terms_.empty()) return -1;
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Monomial& m, double coeff) {
  if (m.dimension() != dimension()) throw std::invalid_argument("term dimension mismatch");
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    if (coeff != 0.0) terms_.emplace(m, coeff);
    return;
  }
  it->second += coeff;
  if (it->second == 0.0) terms_.erase(it);
}

void Polynomial::check_compatible(const Polynomial& other) const {
  if (vars_ != other.vars_) throw std::invalid_argument("polynomial variable lists differ");
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  check_compatible(other);
  Polynomial r(*this);
  for (const auto& [m, c] : other.terms_) r.add_term(m, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  check_compatible(other);
  Polynomial r(*this);
  for (const auto& [m, c] : other.terms_) r.add_term(m, -c);
  return r;
}

Polynomial Polynomial::operator-() const {
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  check_compatible(other);
  Polynomial r(vars_);
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : other.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Polynomial Polynomial::operator*(double scalar) const {
  Polynomial r(vars_);
  if (scalar == 0.0) return r;
  for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * scalar);
  return r;
}

Polynomial Polynomial::pow(int exponent) const {
  if (exponent < 0) throw std::invalid_argument("negative polynomial power");
  Polynomial r = Polynomial::constant(vars_, 1.0);
  for (int i = 0; i < exponent; ++i) r = r * (*this);
  return r;
}

Polynomial Polynomial::derivative(int var_index) const {
  if (var_index < 0 || var_index >= dimension()) throw std::invalid_argument("bad variable index");
  Polynomial r(vars_);
  for (const auto& [m, c] : terms_) {
    int e = m.exponent(var_index);
    if (e == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[var_index] -= 1;
    r.add_term(Monomial(std::move(exps)), c * e);
  }
  return r;
}

double Polynomial::evaluate(const std::vector<double>& point) const {
  if (static_cast<int>(point.size()) != dimension())
    throw std::invalid_argument("evaluation point dimension mismatch");
  double acc = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int i = 0; i < dimension(); ++i) {
      for (int e = 0; e < m.exponent(i); ++e) t *= point[i];
    }
    acc += t;
  }
  return acc;
}

namespace {

void append_number(std::ostringstream& out, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  out << tmp.str();
}

}  // namespace

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  // Highest total degree first, basis order within a grade.
  std::vector<std::pair<Monomial, double>> ordered(terms_.begin(), terms_.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    int da = a.first.degree(), db = b.first.degree();
    if (da != db) return da > db;
    return a.first < b.first;
  });
  std::ostringstream out;
  bool first = true;
  for (const auto& [m, c] : ordered) {
    double v = c;
    if (first) {
      if (v < 0) {
        out << "-";
        v = -v;
      }
    } else {
      out << (v < 0 ? " - " : " + ");
      v = std::abs(v);
    }
    first = false;
    bool need_coeff = (v != 1.0) || m.is_one();
    if (need_coeff) append_number(out, v);
    bool printed_var = false;
    for (int i = 0; i < dimension(); ++i) {
      int e = m.exponent(i);
      if (e == 0) continue;
      if (need_coeff || printed_var) out << "*";
      out << vars_[i];
      if (e > 1) out << "^" << e;
      printed_var = true;
    }
  }
  return out.str();
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

namespace {

void enumerate_exponents(int dimension, int degree_left, std::vector<int>& current,
                         std::vector<Monomial>& out) {
  if (static_cast<int>(current.size()) == dimension) {
    out.emplace_back(current);
    return;
  }
  for (int e = 0; e <= degree_left; ++e) {
    current.push_back(e);
    enumerate_exponents(dimension, degree_left - e, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Monomial> monomial_basis(int dimension, int degree) {
  if (dimension <= 0) throw std::invalid_argument("dimension must be positive");
  if (degree < 0) throw std::invalid_argument("degree must be non-negative");
  std::vector<Monomial> out;
  out.reserve(binomial(dimension + degree, dimension));
  std::vector<int> current;
  enumerate_exponents(dimension, degree, current, out);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Recursive-descent parser over a flat token-free scan of the input.
class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& variables)
      : text_(text), vars_(variables) {}

  Polynomial parse() {
    Polynomial p = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return p;
  }

 private:
  Polynomial parse_expr() {
    skip_ws();
    int sign = 1;
    if (peek() == '+' || peek() == '-') {
      if (get() == '-') sign = -1;
    }
    Polynomial acc = parse_term() * static_cast<double>(sign);
    while (true) {
      skip_ws();
      char c = peek();
      if (c == '+' || c == '-') {
        get();
        Polynomial t = parse_term();
        acc = (c == '+') ? acc + t : acc - t;
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_term() {
    Polynomial acc = parse_factor();
    while (true) {
      skip_ws();
      if (peek() == '*') {
        get();
        acc = acc * parse_factor();
      } else {
        return acc;
      }
    }
  }

  Polynomial parse_factor() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      get();
      Polynomial inner = parse_expr();
      skip_ws();
      if (get() != ')') fail("expected ')'");
      return maybe_power(inner);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return maybe_power(parse_variable());
    fail("expected a number, variable or '('");
    return Polynomial();  // unreachable
  }

  Polynomial maybe_power(Polynomial base) {
    skip_ws();
    if (peek() != '^') return base;
    get();
    return base.pow(parse_uint());
  }

  Polynomial parse_number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
      ++pos_;
    std::string digits = text_.substr(start, pos_ - start);
    if (digits.empty()) fail("expected a number");
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(digits, &used);
      if (used != digits.size()) fail("malformed number '" + digits + "'");
    } catch (const std::exception&) {
      fail("malformed number '" + digits + "'");
    }
    skip_ws();
    // Exact-fraction literals like "8/3": integer '/' positive-integer.
    if (peek() == '/' && digits.find('.') == std::string::npos &&
        digits.find('e') == std::string::npos && digits.find('E') == std::string::npos) {
      get();
      skip_ws();
      size_t dstart = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == dstart) fail("expected a denominator");
      double denom = std::stod(text_.substr(dstart, pos_ - dstart));
      if (denom == 0.0) fail("zero denominator");
      value /= denom;
    }
    return Polynomial::constant(vars_, value);
  }

  Polynomial parse_variable() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    for (int i = 0; i < static_cast<int>(vars_.size()); ++i) {
      if (vars_[i] == name) return Polynomial::variable(vars_, i);
    }
    fail("unknown variable '" + name + "'");
    return Polynomial();  // unreachable
  }

  int parse_uint() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("malformed exponent");
    return std::stoi(text_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char get() { return pos_ < text_.size() ? text_[pos_++] : '\0'; }

  [[noreturn]] void fail(const std::string& message) const {
    throw std::invalid_argument("parse error at offset " + std::to_string(pos_) + ": " + message);
  }

  const std::string& text_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, const std::vector<std::string>& variables) {
  return Parser(text, variables).parse();
}

}  // namespace bcsynth
