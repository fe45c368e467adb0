#pragma once

// Brute-force reference formulas, written straight from the metric
// definitions without sharing code with the library. Only the RNSB oracle
// copies the library's training recipe, because its results are compared
// for exact equality under a shared seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double norm(const Vec& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double cos_sim(const Vec& a, const Vec& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return d / (norm(a) * norm(b));
}

inline Vec mean(const Mat& m) {
  Vec out(m[0].size(), 0.0);
  for (const auto& r : m)
    for (std::size_t i = 0; i < r.size(); ++i) out[i] += r[i] / static_cast<double>(m.size());
  return out;
}

// d(w, A1, A2)
inline double assoc(const Vec& w, const Mat& a1, const Mat& a2) {
  double s1 = 0, s2 = 0;
  for (const auto& x : a1) s1 += cos_sim(w, x);
  for (const auto& x : a2) s2 += cos_sim(w, x);
  return s1 / a1.size() - s2 / a2.size();
}

inline double weat(const Mat& t1, const Mat& t2, const Mat& a1, const Mat& a2) {
  double s = 0;
  for (const auto& w : t1) s += assoc(w, a1, a2);
  for (const auto& w : t2) s -= assoc(w, a1, a2);
  return s;
}

inline double rnd(const Mat& t1, const Mat& t2, const Mat& a) {
  Vec c1 = mean(t1), c2 = mean(t2);
  double s = 0;
  for (const auto& x : a) {
    Vec d1(x.size()), d2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      d1[i] = c1[i] - x[i];
      d2[i] = c2[i] - x[i];
    }
    s += norm(d1) - norm(d2);
  }
  return s;
}

// Rank = 1 + #smaller + (#equal - 1) / 2, "equal" meaning within tol.
inline Vec ranks(const Vec& v, double tol = 0.0) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double x : v) {
      if (x < v[i] - tol) ++less;
      if (std::abs(x - v[i]) <= tol) ++equal;
    }
    r[i] = 1 + less + (equal - 1) / 2;
  }
  return r;
}

inline double pearson(const Vec& a, const Vec& b) {
  double n = static_cast<double>(a.size()), ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double c = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    c += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return c / std::sqrt(va * vb);
}

inline double ect(const Mat& t1, const Mat& t2, const Mat& a) {
  Vec m1 = mean(t1), m2 = mean(t2), s1, s2;
  for (const auto& x : a) {
    s1.push_back(cos_sim(m1, x));
    s2.push_back(cos_sim(m2, x));
  }
  return pearson(ranks(s1, 1e-12), ranks(s2, 1e-12));
}

// Same recipe as the library classifier: weights uniform in [-0.01, 0.01)
// from mt19937_64(seed) with 53-bit conversion, zero bias, full-batch
// gradient descent on mean cross-entropy, A1 labelled 1 then A2 labelled 0.
struct Logit {
  Vec w;
  double b = 0;
  double dotw(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
    return s;
  }
  double p(const Vec& x) const {
    double z = dotw(x) + b;
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
  }
};

inline Logit train(const Mat& a1, const Mat& a2, double lr, int epochs, std::uint64_t seed) {
  std::size_t dim = a1[0].size();
  Logit m;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < dim; ++i) {
    double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    m.w.push_back((2.0 * u - 1.0) * 0.01);
  }
  std::vector<std::pair<Vec, double>> data;
  for (const auto& x : a1) data.emplace_back(x, 1.0);
  for (const auto& x : a2) data.emplace_back(x, 0.0);
  double n = static_cast<double>(data.size());
  for (int e = 0; e < epochs; ++e) {
    Vec g(dim, 0.0);
    double gb = 0.0;
    for (const auto& [x, y] : data) {
      double err = m.p(x) - y;
      for (std::size_t i = 0; i < dim; ++i) g[i] += err * x[i];
      gb += err;
    }
    for (std::size_t i = 0; i < dim; ++i) m.w[i] -= lr * g[i] / n;
    m.b -= lr * gb / n;
  }
  return m;
}

// KL(P || U) over the distinct target words, P proportional to p(A1 | w).
inline double rnsb(const std::vector<std::pair<std::string, Vec>>& target_words, const Mat& a1,
                   const Mat& a2, double lr, int epochs, std::uint64_t seed) {
  Logit m = train(a1, a2, lr, epochs, seed);
  std::set<std::string> seen;
  Vec probs;
  for (const auto& [tok, v] : target_words) {
    if (seen.insert(tok).second) probs.push_back(m.p(v));
  }
  double total = 0.0;
  for (double p : probs) total += p;
  double n = static_cast<double>(probs.size());
  double kl = 0.0;
  for (double p : probs) {
    double q = p / total;
    if (q > 0.0) kl += q * std::log(q * n);
  }
  return kl < 0.0 ? 0.0 : kl;
}

}  // namespace oracle
