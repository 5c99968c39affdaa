#pragma once

// Exact decimal arithmetic on scaled integers. Values are sign * coeff * 10^exp
// with the coefficient held in an unsigned 128-bit integer and normalized so it
// carries no trailing zeros. Addition/subtraction/multiplication are exact up
// to 34 significant digits; division returns an exact quotient when it
// terminates and a 12-significant-digit half-up rounding otherwise.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace mwp {

enum class EvalErrorKind {
  DivisionByZero,
  Overflow,
  UnsupportedPower,
};

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  EvalErrorKind kind() const { return kind_; }

 private:
  EvalErrorKind kind_;
};

namespace detail {

using u128 = unsigned __int128;

inline int digit_count(u128 v) {
  int n = 0;
  do {
    ++n;
    v /= 10;
  } while (v != 0);
  return n;
}

// 10^k for k in [0, 38]; 10^38 < 2^128.
inline u128 pow10_u128(int k) {
  u128 p = 1;
  for (int i = 0; i < k; ++i) p *= 10;
  return p;
}

// Round v to at most `sig` significant digits, half away from zero.
// Returns the rounded coefficient and adds the dropped digit count to exp.
inline u128 round_to_sig(u128 v, int sig, int& exp) {
  int d = digit_count(v);
  if (d <= sig) return v;
  int drop = d - sig;
  u128 p = pow10_u128(drop);
  u128 q = v / p;
  u128 r = v % p;
  if (r >= p - r) ++q;  // r*2 >= p without overflow
  exp += drop;
  return q;
}

}  // namespace detail

class Decimal {
 public:
  static constexpr int kMaxDigits = 34;
  static constexpr int kQuotientDigits = 12;
  static constexpr int kMaxExponent = 400;

  Decimal() : neg_(false), coeff_(0), exp_(0) {}

  static Decimal from_int(long long v) {
    Decimal d;
    d.neg_ = v < 0;
    d.coeff_ = d.neg_ ? detail::u128(-(v + 1)) + 1 : detail::u128(v);
    d.exp_ = 0;
    d.normalize();
    return d;
  }

  // Accepts [+-]digits[.digits]; no exponent notation, no separators.
  static Decimal parse(std::string_view s) {
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      neg = s[i] == '-';
      ++i;
    }
    detail::u128 coeff = 0;
    int frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    int sig = 0;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '.') {
        if (seen_dot) throw std::invalid_argument("bad decimal literal: " + std::string(s));
        seen_dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw std::invalid_argument("bad decimal literal: " + std::string(s));
      seen_digit = true;
      if (sig >= 36) {
        // beyond storable precision: drop the digit, keep the scale
        if (!seen_dot) --frac_digits;
        continue;
      }
      coeff = coeff * 10 + detail::u128(c - '0');
      if (coeff != 0) ++sig;
      if (seen_dot) ++frac_digits;
    }
    if (!seen_digit) throw std::invalid_argument("bad decimal literal: " + std::string(s));
    Decimal d;
    d.neg_ = neg;
    d.coeff_ = coeff;
    d.exp_ = -frac_digits;
    d.normalize();
    return d;
  }

  bool is_zero() const { return coeff_ == 0; }
  bool is_negative() const { return neg_; }
  bool is_positive() const { return !neg_ && coeff_ != 0; }
  int exponent() const { return exp_; }
  detail::u128 coefficient() const { return coeff_; }
  int coefficient_digits() const { return coeff_ == 0 ? 0 : detail::digit_count(coeff_); }

  Decimal negated() const {
    Decimal d = *this;
    if (!d.is_zero()) d.neg_ = !d.neg_;
    return d;
  }

  Decimal abs() const {
    Decimal d = *this;
    d.neg_ = false;
    return d;
  }

  friend Decimal operator+(const Decimal& a, const Decimal& b) { return add_signed(a, b, false); }
  friend Decimal operator-(const Decimal& a, const Decimal& b) { return add_signed(a, b, true); }

  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    if (a.is_zero() || b.is_zero()) return Decimal();
    detail::u128 ca = a.coeff_, cb = b.coeff_;
    int ea = a.exp_, eb = b.exp_;
    // keep the product within 37 digits
    while (detail::digit_count(ca) + detail::digit_count(cb) > 37) {
      if (detail::digit_count(ca) >= detail::digit_count(cb))
        ca = detail::round_to_sig(ca, detail::digit_count(ca) - 1, ea);
      else
        cb = detail::round_to_sig(cb, detail::digit_count(cb) - 1, eb);
    }
    Decimal d;
    d.neg_ = a.neg_ != b.neg_;
    d.coeff_ = ca * cb;
    d.exp_ = ea + eb;
    d.normalize();
    return d;
  }

  friend Decimal operator/(const Decimal& a, const Decimal& b) {
    if (b.is_zero()) throw EvalError(EvalErrorKind::DivisionByZero, "division by zero");
    if (a.is_zero()) return Decimal();
    detail::u128 q = 0, rem = a.coeff_;
    int e_shift = 0;
    bool exact = false;
    while (true) {
      q = q * 10 + rem / b.coeff_;  // first pass multiplies 0
      rem = rem % b.coeff_;
      if (rem == 0) {
        exact = true;
        break;
      }
      if (q != 0 && detail::digit_count(q) >= kMaxDigits) break;
      rem *= 10;
      --e_shift;
    }
    Decimal d;
    d.neg_ = a.neg_ != b.neg_;
    d.coeff_ = q;
    d.exp_ = a.exp_ - b.exp_ + e_shift;
    if (!exact) d.coeff_ = detail::round_to_sig(d.coeff_, kQuotientDigits, d.exp_);
    d.normalize();
    return d;
  }

  // Integer exponent power; |e| <= 64. Exact for e >= 0.
  Decimal pow_int(long long e) const {
    if (e == 0) return from_int(1);
    if (e < -64 || e > 64)
      throw EvalError(EvalErrorKind::UnsupportedPower, "power exponent out of range");
    bool invert = e < 0;
    unsigned long long n = invert ? (unsigned long long)(-e) : (unsigned long long)e;
    Decimal base = *this, acc = from_int(1);
    while (n > 0) {
      if (n & 1) acc = acc * base;
      base = (n >>= 1) ? base * base : base;
    }
    return invert ? from_int(1) / acc : acc;
  }

  // Truncate toward zero.
  Decimal truncated() const {
    if (exp_ >= 0) return *this;
    int drop = -exp_;
    Decimal d;
    d.neg_ = neg_;
    if (drop >= coefficient_digits()) d.coeff_ = 0;  // |value| < 1
    else d.coeff_ = coeff_ / detail::pow10_u128(drop);
    d.exp_ = 0;
    d.normalize();
    return d;
  }

  // Round to nearest integer, ties away from zero.
  Decimal rounded_half_up() const {
    if (exp_ >= 0) return *this;
    int drop = -exp_;
    Decimal d;
    d.neg_ = neg_;
    if (drop > coefficient_digits()) {
      d.coeff_ = 0;  // |value| < 0.1
    } else {
      detail::u128 p = detail::pow10_u128(drop);
      detail::u128 q = coeff_ / p;
      detail::u128 r = coeff_ % p;
      if (r >= p - r) ++q;
      d.coeff_ = q;
    }
    d.exp_ = 0;
    d.normalize();
    return d;
  }

  // |v - round(v)| <= 1e-9, computed exactly.
  bool is_integer_1e9() const {
    if (exp_ >= 0) return true;
    int e = -exp_;
    int d = coefficient_digits();
    if (e > 38) return d <= e - 9;  // value < 1e-2; integer iff it is < 1e-9
    detail::u128 p = detail::pow10_u128(e);
    detail::u128 f = coeff_ % p;
    detail::u128 dist = f <= p - f ? f : p - f;
    if (e >= 9) return dist <= detail::pow10_u128(e - 9);
    return dist == 0;
  }

  // 0 < v < 1, exact.
  bool is_proper_fraction() const {
    if (!is_positive()) return false;
    return coefficient_digits() + exp_ <= 0;  // v < 1
  }

  int compare(const Decimal& o) const {
    if (is_zero() && o.is_zero()) return 0;
    if (neg_ != o.neg_ || is_zero() || o.is_zero()) {
      double sa = is_zero() ? 0 : (neg_ ? -1 : 1);
      double sb = o.is_zero() ? 0 : (o.neg_ ? -1 : 1);
      return sa < sb ? -1 : (sa > sb ? 1 : 0);
    }
    int mag = compare_magnitude(o);
    return neg_ ? -mag : mag;
  }

  bool operator==(const Decimal& o) const { return compare(o) == 0; }
  bool operator!=(const Decimal& o) const { return compare(o) != 0; }
  bool operator<(const Decimal& o) const { return compare(o) < 0; }
  bool operator<=(const Decimal& o) const { return compare(o) <= 0; }
  bool operator>(const Decimal& o) const { return compare(o) > 0; }
  bool operator>=(const Decimal& o) const { return compare(o) >= 0; }

  // Plain decimal notation, no exponent form, no separators.
  std::string to_string() const {
    if (coeff_ == 0) return "0";
    std::string digits;
    detail::u128 v = coeff_;
    while (v != 0) {
      digits.push_back(char('0' + int(v % 10)));
      v /= 10;
    }
    std::string out;
    if (neg_) out.push_back('-');
    if (exp_ >= 0) {
      for (auto it = digits.rbegin(); it != digits.rend(); ++it) out.push_back(*it);
      out.append(size_t(exp_), '0');
      return out;
    }
    int frac = -exp_;
    int n = int(digits.size());
    if (n > frac) {
      for (int i = n - 1; i >= frac; --i) out.push_back(digits[size_t(i)]);
      out.push_back('.');
      for (int i = frac - 1; i >= 0; --i) out.push_back(digits[size_t(i)]);
    } else {
      out += "0.";
      out.append(size_t(frac - n), '0');
      for (int i = n - 1; i >= 0; --i) out.push_back(digits[size_t(i)]);
    }
    return out;
  }

  // Fixed number of decimal places (>= 0), rounding half away from zero.
  std::string to_string_fixed(int places) const {
    Decimal scaled = *this;
    scaled.exp_ += places;
    scaled = scaled.rounded_half_up();
    scaled.exp_ -= places;
    scaled.normalize();
    std::string sign = scaled.neg_ ? "-" : "";
    std::string s = scaled.abs().to_string();
    auto dot = s.find('.');
    std::string ip = dot == std::string::npos ? s : s.substr(0, dot);
    std::string fp = dot == std::string::npos ? "" : s.substr(dot + 1);
    if (places == 0) return sign + ip;
    fp.resize(size_t(places), '0');
    return sign + ip + "." + fp;
  }

  double to_double() const { return std::strtod(to_string().c_str(), nullptr); }

  long long to_int64() const {
    Decimal t = truncated();
    if (t.exp_ > 18) throw EvalError(EvalErrorKind::Overflow, "value too large for int64");
    detail::u128 v = t.coeff_ * detail::pow10_u128(t.exp_);
    if (v > detail::u128(std::numeric_limits<long long>::max()))
      throw EvalError(EvalErrorKind::Overflow, "value too large for int64");
    long long r = (long long)v;
    return neg_ ? -r : r;
  }

  // Count of decimal places in the minimal representation (0 for integers).
  int decimal_places() const { return exp_ < 0 ? -exp_ : 0; }

 private:
  static Decimal add_signed(const Decimal& a, const Decimal& b, bool flip_b) {
    bool na = a.neg_;
    bool nb = flip_b ? !b.neg_ : b.neg_;
    if (a.is_zero()) {
      Decimal d = b;
      d.neg_ = d.is_zero() ? false : nb;
      return d;
    }
    if (b.is_zero()) return a;
    detail::u128 ca = a.coeff_, cb = b.coeff_;
    int ea = a.exp_, eb = b.exp_;
    if (ea < eb) {
      std::swap(ca, cb);
      std::swap(ea, eb);
      std::swap(na, nb);
    }
    int shift = ea - eb;
    if (detail::digit_count(ca) + shift > 37) {
      // drop low digits of the small operand so the big one fits
      int drop = detail::digit_count(ca) + shift - 37;
      cb = detail::round_to_sig(cb, std::max(1, detail::digit_count(cb) - drop), eb);
      shift = ea - eb;
      if (shift < 0) {  // small operand rounded up past alignment
        ea = eb;
        shift = 0;
      }
      if (detail::digit_count(ca) + shift > 37) {
        // small operand is negligible
        Decimal d;
        d.neg_ = na;
        d.coeff_ = ca;
        d.exp_ = ea;
        d.normalize();
        return d;
      }
    }
    detail::u128 A = ca * detail::pow10_u128(shift);
    Decimal d;
    d.exp_ = eb;
    if (na == nb) {
      d.neg_ = na;
      d.coeff_ = A + cb;
    } else if (A >= cb) {
      d.neg_ = na;
      d.coeff_ = A - cb;
    } else {
      d.neg_ = nb;
      d.coeff_ = cb - A;
    }
    d.normalize();
    return d;
  }

  int compare_magnitude(const Decimal& o) const {
    int ma = coefficient_digits() + exp_;
    int mb = o.coefficient_digits() + o.exp_;
    if (ma != mb) return ma < mb ? -1 : 1;
    // same order of magnitude: align and compare coefficients
    detail::u128 ca = coeff_, cb = o.coeff_;
    int da = coefficient_digits(), db = o.coefficient_digits();
    if (da < db) ca *= detail::pow10_u128(db - da);
    else cb *= detail::pow10_u128(da - db);
    return ca < cb ? -1 : (ca > cb ? 1 : 0);
  }

  void normalize() {
    if (coeff_ == 0) {
      neg_ = false;
      exp_ = 0;
      return;
    }
    while (coeff_ % 10 == 0) {
      coeff_ /= 10;
      ++exp_;
    }
    if (coefficient_digits() > kMaxDigits)
      coeff_ = detail::round_to_sig(coeff_, kMaxDigits, exp_);
    while (coeff_ % 10 == 0) {
      coeff_ /= 10;
      ++exp_;
    }
    if (exp_ > kMaxExponent || coefficient_digits() + exp_ > kMaxExponent)
      throw EvalError(EvalErrorKind::Overflow, "decimal overflow");
    if (exp_ < -kMaxExponent) throw EvalError(EvalErrorKind::Overflow, "decimal underflow");
  }

  bool neg_;
  detail::u128 coeff_;
  int exp_;
};

// Shared answer comparison: |a - b| <= 1e-6 * max(1, |b|).
inline bool answers_match(const Decimal& computed, const Decimal& expected) {
  static const Decimal tol = Decimal::parse("0.000001");
  Decimal diff = (computed - expected).abs();
  Decimal scale = expected.abs();
  if (scale < Decimal::from_int(1)) scale = Decimal::from_int(1);
  return diff <= tol * scale;
}

}  // namespace mwp
