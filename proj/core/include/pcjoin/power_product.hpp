#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace pcj {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Π base_i^{exponent_i} with non-negative integer bases and non-negative
/// rational exponents, kept symbolic so comparisons stay exact.
///
/// Canonical form: bases ascending and distinct, no base 1, no zero
/// exponent; a zero base with a positive exponent collapses to the zero monomial.
class Monomial {
 public:
  struct Factor {
    BigInt base;
    Rational exponent;
    friend bool operator==(const Factor&, const Factor&) = default;
  };

  Monomial() = default;  // the empty product, 1
  static Monomial integer(BigInt value);
  static Monomial power(BigInt base, Rational exponent);

  Monomial& operator*=(const Monomial& other);
  friend Monomial operator*(Monomial a, const Monomial& b) { return a *= b; }

  bool is_zero() const { return zero_; }
  const std::vector<Factor>& factors() const { return factors_; }

  /// Smallest L with every exponent·L integral.
  BigInt common_denominator() const;
  /// value^L as an integer for L = common_denominator().
  BigInt raised() const;
  BigInt floor() const;
  BigInt ceil() const;
  /// Set when the value is an integer.
  bool exact_integer(BigInt& out) const;
  double to_double() const;
  std::string to_string() const;

  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.zero_ == b.zero_ && a.factors_ == b.factors_;
  }
  /// Exact numeric comparison: -1, 0, 1.
  friend int compare(const Monomial& a, const Monomial& b);

 private:
  void normalize();

  bool zero_ = false;
  std::vector<Factor> factors_;
};

/// Sum of monomials; the value of a bound.
class BoundValue {
 public:
  BoundValue() = default;
  explicit BoundValue(Monomial term) { terms_.push_back(std::move(term)); }

  BoundValue& operator+=(const BoundValue& other);
  const std::vector<Monomial>& terms() const { return terms_; }

  /// Σ floor(term): a sound integer bound whenever the real value is.
  BigInt certified_integer() const;
  bool exact_integer(BigInt& out) const;
  double to_double() const;
  std::string to_string() const;

  /// Structural equality of the term lists; implies numeric equality.
  friend bool operator==(const BoundValue& a, const BoundValue& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<Monomial> terms_;
};

/// floor(value^(1/k)) for value ≥ 0, k ≥ 1.
BigInt integer_root(const BigInt& value, unsigned k);

std::string to_string(const Rational& r);

}  // namespace pcj
