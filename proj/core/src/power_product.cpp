#include "pcjoin/power_product.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcjoin/error.hpp"

namespace pcj {

namespace mp = boost::multiprecision;

std::string to_string(const Rational& r) {
  const BigInt num = mp::numerator(r);
  const BigInt den = mp::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigInt integer_root(const BigInt& value, unsigned k) {
  if (value < 0 || k == 0) fail(ErrorKind::Internal, "integer_root domain error");
  if (value < 2 || k == 1) return value;
  // Newton from an over-estimate: 2^ceil(bits/k) ≥ root.
  const unsigned bits = static_cast<unsigned>(mp::msb(value)) + 1;
  BigInt x = BigInt(1) << ((bits + k - 1) / k);
  while (true) {
    const BigInt y = ((k - 1) * x + value / mp::pow(x, k - 1)) / k;
    if (y >= x) break;
    x = y;
  }
  while (mp::pow(x, k) > value) --x;
  while (mp::pow(x + 1, k) <= value) ++x;
  return x;
}

namespace {

unsigned to_unsigned(const BigInt& v, const char* what) {
  if (v < 0 || v > 1u << 20) fail(ErrorKind::ScaleExceeded, std::string("exponent too large for exact evaluation: ") + what);
  return v.convert_to<unsigned>();
}

}  // namespace

Monomial Monomial::integer(BigInt value) { return power(std::move(value), Rational(1)); }

Monomial Monomial::power(BigInt base, Rational exponent) {
  if (base < 0 || exponent < 0) fail(ErrorKind::Internal, "monomial needs non-negative base and exponent");
  Monomial m;
  m.factors_.push_back({std::move(base), std::move(exponent)});
  m.normalize();
  return m;
}

void Monomial::normalize() {
  if (zero_) {
    factors_.clear();
    return;
  }
  std::sort(factors_.begin(), factors_.end(), [](const Factor& a, const Factor& b) { return a.base < b.base; });
  std::vector<Factor> merged;
  for (auto& f : factors_) {
    if (f.exponent == 0 || f.base == 1) continue;
    if (f.base == 0) {
      zero_ = true;
      factors_.clear();
      return;
    }
    if (!merged.empty() && merged.back().base == f.base) {
      merged.back().exponent += f.exponent;
    } else {
      merged.push_back(std::move(f));
    }
  }
  factors_ = std::move(merged);
}

Monomial& Monomial::operator*=(const Monomial& other) {
  zero_ = zero_ || other.zero_;
  factors_.insert(factors_.end(), other.factors_.begin(), other.factors_.end());
  normalize();
  return *this;
}

BigInt Monomial::common_denominator() const {
  BigInt l = 1;
  for (const auto& f : factors_) {
    const BigInt d = mp::denominator(f.exponent);
    l = l / mp::gcd(l, d) * d;
  }
  return l;
}

BigInt Monomial::raised() const {
  if (zero_) return 0;
  const BigInt l = common_denominator();
  BigInt out = 1;
  for (const auto& f : factors_) {
    const BigInt e = mp::numerator(f.exponent) * (l / mp::denominator(f.exponent));
    out *= mp::pow(f.base, to_unsigned(e, "monomial"));
  }
  return out;
}

BigInt Monomial::floor() const {
  if (zero_) return 0;
  return integer_root(raised(), to_unsigned(common_denominator(), "root"));
}

BigInt Monomial::ceil() const {
  BigInt v;
  if (exact_integer(v)) return v;
  return floor() + 1;
}

bool Monomial::exact_integer(BigInt& out) const {
  if (zero_) {
    out = 0;
    return true;
  }
  const unsigned l = to_unsigned(common_denominator(), "root");
  const BigInt p = raised();
  const BigInt r = integer_root(p, l);
  if (mp::pow(r, l) != p) return false;
  out = r;
  return true;
}

double Monomial::to_double() const {
  if (zero_) return 0.0;
  double log_value = 0.0;
  for (const auto& f : factors_) log_value += f.exponent.convert_to<double>() * std::log(f.base.convert_to<double>());
  return std::exp(log_value);
}

std::string Monomial::to_string() const {
  if (zero_) return "0";
  if (factors_.empty()) return "1";
  std::string out;
  for (const auto& f : factors_) {
    if (!out.empty()) out += " * ";
    out += f.base.str();
    if (f.exponent != 1) out += "^(" + pcj::to_string(f.exponent) + ")";
  }
  return out;
}

int compare(const Monomial& a, const Monomial& b) {
  if (a.zero_ || b.zero_) return a.zero_ == b.zero_ ? 0 : (a.zero_ ? -1 : 1);
  if (a == b) return 0;
  // Compare a^L and b^L for a shared L.
  BigInt la = a.common_denominator();
  BigInt lb = b.common_denominator();
  const BigInt l = la / mp::gcd(la, lb) * lb;
  const auto lift = [&](const Monomial& m, const BigInt& lm) {
    return mp::pow(m.raised(), to_unsigned(l / lm, "compare"));
  };
  const BigInt va = lift(a, la);
  const BigInt vb = lift(b, lb);
  return va < vb ? -1 : (va > vb ? 1 : 0);
}

BoundValue& BoundValue::operator+=(const BoundValue& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

BigInt BoundValue::certified_integer() const {
  BigInt sum = 0;
  for (const auto& t : terms_) sum += t.floor();
  return sum;
}

bool BoundValue::exact_integer(BigInt& out) const {
  BigInt sum = 0;
  for (const auto& t : terms_) {
    BigInt v;
    if (!t.exact_integer(v)) return false;
    sum += v;
  }
  out = sum;
  return true;
}

double BoundValue::to_double() const {
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.to_double();
  return sum;
}

std::string BoundValue::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += " + ";
    out += t.to_string();
  }
  return out;
}

}  // namespace pcj
