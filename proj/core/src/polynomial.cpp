#include "mcflab/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mcf {

namespace {

double monomial(const Polynomial::Exponent& e, const VecX& x) {
  double v = 1;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (int p = 0; p < e[i]; ++p) v *= x[static_cast<Eigen::Index>(i)];
  return v;
}

}  // namespace

Polynomial Polynomial::constant(int vars, double c) {
  Polynomial p(vars);
  p.add_term(Exponent(static_cast<std::size_t>(vars), 0), c);
  return p;
}

Polynomial Polynomial::coordinate(int vars, int i) {
  Polynomial p(vars);
  Exponent e(static_cast<std::size_t>(vars), 0);
  e[static_cast<std::size_t>(i)] = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, std::accumulate(e.begin(), e.end(), 0));
  return d;
}

double Polynomial::coefficient(const Exponent& e) const {
  const auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponent& e, double c) {
  if (static_cast<int>(e.size()) != vars_) throw DomainError("exponent has the wrong number of variables");
  if (c == 0) return;
  const double v = (terms_[e] += c);
  if (v == 0) terms_.erase(e);
}

double Polynomial::operator()(const VecX& x) const {
  double v = 0;
  for (const auto& [e, c] : terms_) v += c * monomial(e, x);
  return v;
}

VecX Polynomial::gradient(const VecX& x) const {
  VecX g(vars_);
  for (int i = 0; i < vars_; ++i) g[i] = derivative(i)(x);
  return g;
}

MatX Polynomial::hessian(const VecX& x) const {
  MatX h(vars_, vars_);
  for (int i = 0; i < vars_; ++i) {
    const Polynomial di = derivative(i);
    for (int j = i; j < vars_; ++j) h(i, j) = h(j, i) = di.derivative(j)(x);
  }
  return h;
}

Polynomial Polynomial::derivative(int i) const {
  Polynomial d(vars_);
  const auto ui = static_cast<std::size_t>(i);
  for (const auto& [e, c] : terms_) {
    if (e[ui] == 0) continue;
    Exponent lowered = e;
    --lowered[ui];
    d.add_term(lowered, c * e[ui]);
  }
  return d;
}

Polynomial Polynomial::laplacian() const {
  Polynomial l(vars_);
  for (int i = 0; i < vars_; ++i) l = l + derivative(i).derivative(i);
  return l;
}

Polynomial Polynomial::drift() const {
  // <x, grad x^e> = |e| x^e.
  Polynomial out = laplacian();
  for (const auto& [e, c] : terms_) out.add_term(e, -0.5 * std::accumulate(e.begin(), e.end(), 0) * c);
  out.prune();
  return out;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.vars_ != vars_) throw DomainError("polynomials in different numbers of variables");
  Polynomial r = *this;
  for (const auto& [e, c] : o.terms_) r.add_term(e, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.vars_ != vars_) throw DomainError("polynomials in different numbers of variables");
  Polynomial r(vars_);
  for (const auto& [a, ca] : terms_)
    for (const auto& [b, cb] : o.terms_) {
      Exponent e(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) e[i] = a[i] + b[i];
      r.add_term(e, ca * cb);
    }
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r(vars_);
  for (const auto& [e, c] : terms_) r.add_term(e, c * s);
  return r;
}

double Polynomial::max_coefficient() const {
  double m = 0;
  for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [e, c] = *it;
    out << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    first = false;
    const bool unit = std::all_of(e.begin(), e.end(), [](int p) { return p == 0; });
    if (std::abs(c) != 1 || unit) out << std::abs(c);
    bool star = std::abs(c) != 1 && !unit;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      out << (star ? "*" : "") << 'x' << i + 1;
      if (e[i] > 1) out << '^' << e[i];
      star = true;
    }
  }
  return out.str();
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) it = it->second == 0 ? terms_.erase(it) : std::next(it);
}

Polynomial hermite_1d(int degree) {
  if (degree < 0) throw DomainError("negative Hermite degree");
  Polynomial prev = Polynomial::constant(1, 1.0);
  if (degree == 0) return prev;
  const Polynomial x = Polynomial::coordinate(1, 0);
  Polynomial cur = x;
  for (int a = 1; a < degree; ++a) {
    Polynomial next = x * cur - prev * (2.0 * a);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

Polynomial hermite_product(const std::vector<int>& degrees) {
  const int n = static_cast<int>(degrees.size());
  Polynomial p = Polynomial::constant(n, 1.0);
  for (int i = 0; i < n; ++i) {
    const Polynomial h = hermite_1d(degrees[static_cast<std::size_t>(i)]);
    Polynomial lifted(n);
    for (const auto& [e, c] : h.terms()) {
      Polynomial::Exponent le(static_cast<std::size_t>(n), 0);
      le[static_cast<std::size_t>(i)] = e[0];
      lifted.add_term(le, c);
    }
    p = p * lifted;
  }
  return p;
}

}  // namespace mcf
