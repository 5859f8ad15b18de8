#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcflab/common.hpp"

namespace mcf {

/// Sparse real polynomial in `vars` variables, keyed by exponent vectors.
class Polynomial {
 public:
  using Exponent = std::vector<int>;

  explicit Polynomial(int vars = 1) : vars_(vars) {}
  static Polynomial constant(int vars, double c);
  /// The coordinate x_i.
  static Polynomial coordinate(int vars, int i);

  int vars() const { return vars_; }
  int degree() const;
  const std::map<Exponent, double>& terms() const { return terms_; }
  double coefficient(const Exponent& e) const;
  void add_term(const Exponent& e, double c);

  double operator()(const VecX& x) const;
  VecX gradient(const VecX& x) const;
  MatX hessian(const VecX& x) const;

  Polynomial derivative(int i) const;
  Polynomial laplacian() const;
  /// Delta p - <x, grad p> / 2 (exact, term by term).
  Polynomial drift() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  /// Largest absolute coefficient.
  double max_coefficient() const;
  std::string to_string() const;

 private:
  void prune();
  int vars_;
  std::map<Exponent, double> terms_;
};

/// One-variable eigenpolynomials of h'' - x h' / 2 = -(a / 2) h with leading coefficient 1:
/// h_0 = 1, h_1 = x, h_{a+1} = x h_a - 2 a h_{a-1}.
Polynomial hermite_1d(int degree);

/// h_{a_1}(x_1) ... h_{a_n}(x_n) in n variables.
Polynomial hermite_product(const std::vector<int>& degrees);

}  // namespace mcf
