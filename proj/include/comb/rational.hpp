#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace comb {

// Minimal arbitrary-precision integer, little-endian base-2^32 limbs.
// Only what the exact tridiagonal solve needs: +, -, *, divmod, gcd, compare.
class BigInt {
 public:
  BigInt() = default;
  BigInt(std::int64_t v) {
    if (v < 0) { neg_ = true; v = -v; }
    std::uint64_t u = static_cast<std::uint64_t>(v);
    while (u) { limbs_.push_back(static_cast<std::uint32_t>(u)); u >>= 32; }
  }

  bool is_zero() const { return limbs_.empty(); }
  bool negative() const { return neg_; }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.neg_ == b.neg_) { BigInt r = add_mag(a, b); r.neg_ = a.neg_; r.norm(); return r; }
    int c = cmp_mag(a, b);
    if (c == 0) return BigInt();
    BigInt r = c > 0 ? sub_mag(a, b) : sub_mag(b, a);
    r.neg_ = c > 0 ? a.neg_ : b.neg_;
    r.norm();
    return r;
  }
  friend BigInt operator-(const BigInt& a, const BigInt& b) { BigInt nb = b; nb.neg_ = !b.neg_; return a + nb; }
  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    BigInt r;
    if (a.is_zero() || b.is_zero()) return r;
    r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
    for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < b.limbs_.size(); ++j) {
        std::uint64_t cur = r.limbs_[i + j] +
                            static_cast<std::uint64_t>(a.limbs_[i]) * b.limbs_[j] + carry;
        r.limbs_[i + j] = static_cast<std::uint32_t>(cur);
        carry = cur >> 32;
      }
      r.limbs_[i + b.limbs_.size()] += static_cast<std::uint32_t>(carry);
    }
    r.neg_ = a.neg_ != b.neg_;
    r.norm();
    return r;
  }

  // schoolbook long division on 32-bit limbs via 64-bit partials
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.is_zero()) throw std::domain_error("BigInt division by zero");
    q = BigInt();
    r = BigInt();
    if (cmp_mag(a, b) < 0) { r = a; r.neg_ = false; q.neg_ = false; finish_signs(a, b, q, r); return; }
    q.limbs_.assign(a.limbs_.size(), 0);
    for (std::size_t bit = a.limbs_.size() * 32; bit-- > 0;) {
      r = shl1(r);
      if ((a.limbs_[bit / 32] >> (bit % 32)) & 1u) r.limbs_.empty() ? r.limbs_.push_back(1) : void(r.limbs_[0] |= 1u);
      if (cmp_mag(r, b) >= 0) {
        r = sub_mag(r, b);
        r.norm();
        q.limbs_[bit / 32] |= (1u << (bit % 32));
      }
    }
    q.norm();
    r.norm();
    finish_signs(a, b, q, r);
  }

  static BigInt gcd(BigInt a, BigInt b) {
    a.neg_ = false;
    b.neg_ = false;
    while (!b.is_zero()) {
      BigInt q, r;
      divmod(a, b, q, r);
      a = b;
      b = r;
    }
    return a;
  }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.neg_ == b.neg_ && a.limbs_ == b.limbs_;
  }
  // sign-aware compare
  static int cmp(const BigInt& a, const BigInt& b) {
    if (a.neg_ != b.neg_) return a.neg_ ? -1 : 1;
    int m = cmp_mag(a, b);
    return a.neg_ ? -m : m;
  }

  double to_double() const {
    double v = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) v = v * 4294967296.0 + limbs_[i];
    return neg_ ? -v : v;
  }

 private:
  static void finish_signs(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    // truncated division semantics; only used with exact or sign-free cases
    q.neg_ = !q.is_zero() && (a.neg_ != b.neg_);
    r.neg_ = !r.is_zero() && a.neg_;
  }
  static int cmp_mag(const BigInt& a, const BigInt& b) {
    if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
    for (std::size_t i = a.limbs_.size(); i-- > 0;)
      if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
    return 0;
  }
  static BigInt add_mag(const BigInt& a, const BigInt& b) {
    BigInt r;
    const auto &x = a.limbs_, &y = b.limbs_;
    std::size_t n = x.size() > y.size() ? x.size() : y.size();
    r.limbs_.assign(n + 1, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t cur = carry + (i < x.size() ? x[i] : 0) + (i < y.size() ? y[i] : 0);
      r.limbs_[i] = static_cast<std::uint32_t>(cur);
      carry = cur >> 32;
    }
    r.limbs_[n] = static_cast<std::uint32_t>(carry);
    r.norm();
    return r;
  }
  static BigInt sub_mag(const BigInt& a, const BigInt& b) {  // |a| >= |b|
    BigInt r;
    r.limbs_ = a.limbs_;
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < r.limbs_.size(); ++i) {
      std::int64_t cur = static_cast<std::int64_t>(r.limbs_[i]) - borrow -
                         (i < b.limbs_.size() ? b.limbs_[i] : 0);
      borrow = cur < 0;
      if (cur < 0) cur += (1LL << 32);
      r.limbs_[i] = static_cast<std::uint32_t>(cur);
    }
    r.norm();
    return r;
  }
  static BigInt shl1(const BigInt& a) {
    BigInt r;
    r.limbs_.assign(a.limbs_.size() + 1, 0);
    std::uint32_t carry = 0;
    for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
      r.limbs_[i] = (a.limbs_[i] << 1) | carry;
      carry = a.limbs_[i] >> 31;
    }
    r.limbs_[a.limbs_.size()] = carry;
    r.neg_ = a.neg_;
    r.norm();
    return r;
  }
  void norm() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    if (limbs_.empty()) neg_ = false;
  }

  std::vector<std::uint32_t> limbs_;
  bool neg_ = false;
};

// Reduced fraction on top of BigInt; denominator kept positive.
class BigRat {
 public:
  BigRat() : num_(0), den_(1) {}
  BigRat(std::int64_t v) : num_(v), den_(1) {}
  BigRat(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) { reduce(); }
  static BigRat fraction(std::int64_t n, std::int64_t d) { return BigRat(BigInt(n), BigInt(d)); }

  friend BigRat operator+(const BigRat& a, const BigRat& b) {
    return BigRat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend BigRat operator-(const BigRat& a, const BigRat& b) {
    return BigRat(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend BigRat operator*(const BigRat& a, const BigRat& b) {
    return BigRat(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend BigRat operator/(const BigRat& a, const BigRat& b) {
    if (b.num_.is_zero()) throw std::domain_error("BigRat division by zero");
    return BigRat(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend bool operator==(const BigRat& a, const BigRat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<=(const BigRat& a, const BigRat& b) {
    return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_) <= 0;
  }
  friend bool operator<(const BigRat& a, const BigRat& b) {
    return BigInt::cmp(a.num_ * b.den_, b.num_ * a.den_) < 0;
  }

  double to_double() const { return num_.to_double() / den_.to_double(); }

 private:
  void reduce() {
    if (num_.is_zero()) { den_ = BigInt(1); return; }
    if (den_.negative()) { num_ = BigInt(0) - num_; den_ = BigInt(0) - den_; }
    BigInt g = BigInt::gcd(num_, den_);
    BigInt q, r;
    BigInt::divmod(num_, g, q, r);
    num_ = q;
    BigInt::divmod(den_, g, q, r);
    den_ = q;
  }

  BigInt num_, den_;
};

}  // namespace comb
