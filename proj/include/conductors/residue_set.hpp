#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "conductors/integer_kernel.hpp"

namespace conductors {

/// A subset of (Z/QZ)^2 stored as a CRT product of local tables.
///
/// Each factor is a bitmap over (Z/M_i Z)^2; the moduli M_i are pairwise
/// coprime and multiply to Q. A set given by an arbitrary predicate is the
/// one-factor case M_0 = Q.
class ResidueSet {
 public:
  struct Factor {
    u64 modulus = 1;
    std::vector<std::uint8_t> member;  // index a * modulus + b

    bool contains(u64 a, u64 b) const { return member[a * modulus + b] != 0; }
    u64 count() const { return u64(std::count(member.begin(), member.end(), std::uint8_t{1})); }
  };

  ResidueSet() = default;

  static ResidueSet from_predicate(u64 Q, const std::function<bool(u64, u64)>& pred) {
    if (Q == 0) throw std::domain_error("ResidueSet: modulus must be positive");
    Factor f;
    f.modulus = Q;
    f.member.assign(Q * Q, 0);
    for (u64 a = 0; a < Q; ++a)
      for (u64 b = 0; b < Q; ++b) f.member[a * Q + b] = pred(a, b) ? 1 : 0;
    ResidueSet s;
    s.modulus_ = Q;
    s.factors_.push_back(std::move(f));
    return s;
  }

  static ResidueSet from_pairs(u64 Q, const std::vector<std::pair<u64, u64>>& pairs) {
    ResidueSet s = from_predicate(Q, [](u64, u64) { return false; });
    for (auto [a, b] : pairs) s.factors_[0].member[(a % Q) * Q + (b % Q)] = 1;
    return s;
  }

  static ResidueSet full(u64 Q) {
    return from_predicate(Q, [](u64, u64) { return true; });
  }

  static ResidueSet product(std::vector<Factor> factors) {
    ResidueSet s;
    s.modulus_ = 1;
    for (const auto& f : factors) {
      if (f.member.size() != f.modulus * f.modulus)
        throw std::domain_error("ResidueSet: factor table has the wrong size");
      if (std::gcd(s.modulus_, f.modulus) != 1)
        throw std::domain_error("ResidueSet: factor moduli must be pairwise coprime");
      s.modulus_ *= f.modulus;
    }
    s.factors_ = std::move(factors);
    return s;
  }

  u64 modulus() const { return modulus_; }
  const std::vector<Factor>& factors() const { return factors_; }

  bool contains(i64 a, i64 b) const {
    for (const auto& f : factors_) {
      const i64 m = i64(f.modulus);
      if (!f.contains(u64(((a % m) + m) % m), u64(((b % m) + m) % m))) return false;
    }
    return true;
  }

  BigInt cardinality() const {
    BigInt c = 1;
    for (const auto& f : factors_) c *= f.count();
    return c;
  }

 private:
  u64 modulus_ = 1;
  std::vector<Factor> factors_;
};

}  // namespace conductors
