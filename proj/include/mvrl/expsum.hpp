#pragma once

#include <cmath>
#include <vector>

#include "mvrl/common.hpp"

namespace mvrl {

// Exponential-polynomial mixture  f(h) = sum_j c_j * h^p_j * exp(-r_j * h).
//
// This family is closed under addition, scaling, multiplication by
// exp(-rho*h), pointwise products, and antidifferentiation, which is exactly
// what the piecewise-constant-coefficient value recursions need: within a
// segment every curve of interest (policy intercept, value coefficients,
// running-cost integrand) is such a mixture in the backward time
// h = segment_end - t, so all integrals are evaluated in closed form with no
// quadrature anywhere.
struct ExpTerm {
  double coef = 0.0;
  double rate = 0.0;
  int power = 0;
};

class ExpSum {
 public:
  ExpSum() = default;

  static ExpSum zero() { return ExpSum(); }

  static ExpSum constant(double c) {
    ExpSum s;
    s.push(c, 0.0, 0);
    return s;
  }

  static ExpSum term(double coef, double rate, int power = 0) {
    ExpSum s;
    s.push(coef, rate, power);
    return s;
  }

  const std::vector<ExpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double value(double h) const {
    double acc = 0.0;
    for (const ExpTerm& t : terms_) acc += t.coef * pow_int(h, t.power) * std::exp(-t.rate * h);
    return acc;
  }

  ExpSum operator+(const ExpSum& other) const {
    ExpSum out = *this;
    for (const ExpTerm& t : other.terms_) out.push(t.coef, t.rate, t.power);
    return out;
  }

  ExpSum operator-(const ExpSum& other) const { return *this + other.scaled(-1.0); }

  ExpSum scaled(double s) const {
    ExpSum out = *this;
    for (ExpTerm& t : out.terms_) t.coef *= s;
    return out;
  }

  // Multiply by exp(-delta * h).
  ExpSum rate_shifted(double delta) const {
    ExpSum out;
    for (const ExpTerm& t : terms_) out.push(t.coef, t.rate + delta, t.power);
    return out;
  }

  ExpSum product(const ExpSum& other) const {
    ExpSum out;
    for (const ExpTerm& a : terms_)
      for (const ExpTerm& b : other.terms_) out.push(a.coef * b.coef, a.rate + b.rate, a.power + b.power);
    return out;
  }

  // f(h + delta) re-expressed as a mixture in h (binomial expansion of the
  // shifted monomials); used to rebase a segment function onto a sub-segment
  // whose right endpoint sits delta earlier.
  ExpSum shifted_argument(double delta) const {
    ExpSum out;
    for (const ExpTerm& t : terms_) {
      const double damp = t.coef * std::exp(-t.rate * delta);
      double binom = 1.0;
      double delta_pow = 1.0;
      for (int j = t.power; j >= 0; --j) {
        out.push(damp * binom * delta_pow, t.rate, j);
        binom = binom * j / (t.power - j + 1);
        delta_pow *= delta;
      }
    }
    return out;
  }

  // F(h) = integral of f over [0, h], as a mixture again (F(0) = 0).
  ExpSum antiderivative() const {
    ExpSum out;
    for (const ExpTerm& t : terms_) {
      if (t.rate == 0.0) {
        out.push(t.coef / (t.power + 1), 0.0, t.power + 1);
        continue;
      }
      // integral_0^h x^p e^{-rx} dx
      //   = p!/r^{p+1} - e^{-rh} * sum_{j=0..p} (p!/j!) h^j / r^{p-j+1}
      double factorial_ratio = 1.0;  // p!/j! while j descends; p!/0! = p! after the loop
      for (int j = t.power; j >= 0; --j) {
        out.push(-t.coef * factorial_ratio / pow_int(t.rate, t.power - j + 1), t.rate, j);
        if (j > 0) factorial_ratio *= j;
      }
      out.push(t.coef * factorial_ratio / pow_int(t.rate, t.power + 1), 0.0, 0);
    }
    return out;
  }

  // integral of f over [0, h], evaluated stably even when |rate*h| is tiny.
  double integrate(double h) const {
    double acc = 0.0;
    for (const ExpTerm& t : terms_) acc += t.coef * integral_mono(t.rate, t.power, h);
    return acc;
  }

 private:
  static double pow_int(double x, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
  }

  // integral_0^h x^p e^{-rx} dx for a single monomial-exponential.
  static double integral_mono(double r, int p, double h) {
    if (r == 0.0) return pow_int(h, p + 1) / (p + 1);
    if (std::abs(r * h) < 2.0) {
      // Power series sum_k (-r)^k h^{p+k+1} / (k! (p+k+1)). The closed form
      // below cancels catastrophically in this range (its leading terms scale
      // like p!/(rh)^{p+1} times the result); 48 terms reach machine epsilon
      // for |rh| < 2 at every supported power.
      double acc = 0.0;
      double rk = 1.0;  // (-r)^k / k!
      for (int k = 0; k < 48; ++k) {
        acc += rk * pow_int(h, p + k + 1) / (p + k + 1);
        rk *= -r / (k + 1);
      }
      return acc;
    }
    if (p == 0) return -std::expm1(-r * h) / r;
    // p!/r^{p+1} - e^{-rh} sum_{j=0}^{p} (p!/j!) h^j / r^{p-j+1}
    double factorial = 1.0;
    for (int j = 2; j <= p; ++j) factorial *= j;
    double jfac = 1.0;
    double tail = 0.0;
    for (int j = 0; j <= p; ++j) {
      if (j > 0) jfac *= j;
      tail += (factorial / jfac) * pow_int(h, j) / pow_int(r, p - j + 1);
    }
    return factorial / pow_int(r, p + 1) - std::exp(-r * h) * tail;
  }

  void push(double coef, double rate, int power) {
    if (coef == 0.0) return;
    if (std::abs(rate) < 1e-14) rate = 0.0;
    require(power <= 8, ErrorCategory::numeric, "exponential-mixture polynomial degree overflow");
    for (ExpTerm& t : terms_) {
      if (t.power == power && std::abs(t.rate - rate) <= 1e-12 * std::max(1.0, std::abs(rate))) {
        t.coef += coef;
        return;
      }
    }
    terms_.push_back({coef, rate, power});
  }

  std::vector<ExpTerm> terms_;
};

}  // namespace mvrl
