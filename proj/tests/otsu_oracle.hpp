#pragma once

// Exhaustive Otsu search in exact rational arithmetic: for every split k the
// two class weights and means are recomputed from scratch.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

struct ExhaustiveOtsu {
  int level = 0;
  Rational between_variance;
};

inline Rational between_class_variance(const std::vector<std::uint64_t>& hist, int k) {
  Rational n0 = 0, n1 = 0, s0 = 0, s1 = 0, total = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const Rational count = Rational(hist[i]);
    total += count;
    if (static_cast<int>(i) <= k) {
      n0 += count;
      s0 += count * static_cast<long long>(i);
    } else {
      n1 += count;
      s1 += count * static_cast<long long>(i);
    }
  }
  if (n0 == 0 || n1 == 0) return Rational(0);
  const Rational w0 = n0 / total;
  const Rational w1 = n1 / total;
  const Rational mu0 = s0 / n0;
  const Rational mu1 = s1 / n1;
  return w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
}

inline ExhaustiveOtsu exhaustive_otsu(const std::vector<std::uint64_t>& hist) {
  ExhaustiveOtsu best{0, between_class_variance(hist, 0)};
  for (int k = 1; k + 1 < static_cast<int>(hist.size()); ++k) {
    const Rational v = between_class_variance(hist, k);
    if (v > best.between_variance) best = {k, v};
  }
  return best;
}

// Same exhaustive search with running class sums; still exact.
inline ExhaustiveOtsu exhaustive_otsu_prefix(const std::vector<std::uint64_t>& hist) {
  Rational total = 0, total_sum = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    total += Rational(hist[i]);
    total_sum += Rational(hist[i]) * static_cast<long long>(i);
  }
  ExhaustiveOtsu best{-1, Rational(0)};
  Rational n0 = 0, s0 = 0;
  for (int k = 0; k + 1 < static_cast<int>(hist.size()); ++k) {
    n0 += Rational(hist[k]);
    s0 += Rational(hist[k]) * k;
    const Rational n1 = total - n0;
    Rational v = 0;
    if (n0 != 0 && n1 != 0) {
      const Rational diff = s0 / n0 - (total_sum - s0) / n1;
      v = (n0 / total) * (n1 / total) * diff * diff;
    }
    if (best.level < 0 || v > best.between_variance) best = {k, v};
  }
  return best;
}

}  // namespace oracle
