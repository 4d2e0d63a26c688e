#pragma once

// Reference computations used only by tests. Deliberately naive and written
// without Eigen so they do not share a code path with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // row-major, rows = observations

inline double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Mean of the k smallest squared distances; full sort, then ascending sum.
inline double knn(const std::vector<Vec>& train, const Vec& y, int k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < train.size(); ++i) d.push_back({sq_dist(train[i], y), i});
  std::sort(d.begin(), d.end());
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += d[static_cast<std::size_t>(i)].first;
  return s / k;
}

/// (#anomalous > normal + 0.5 #ties) / (n_anom * n_norm) by explicit pairs.
inline double auc_pairs(const Vec& normal, const Vec& anomalous) {
  double wins = 0.0;
  for (double a : anomalous) {
    for (double n : normal) {
      if (a > n) wins += 1.0;
      else if (a == n) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(normal.size()) * static_cast<double>(anomalous.size()));
}

inline Vec column_means(const Mat& x) {
  Vec mu(x.front().size(), 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < row.size(); ++j) mu[j] += row[j];
  for (auto& m : mu) m /= static_cast<double>(x.size());
  return mu;
}

/// Sum over samples of (x - mu)(x - mu)^T / n.
inline Mat mle_covariance(const Mat& x) {
  const auto mu = column_means(x);
  const std::size_t p = mu.size();
  Mat s(p, Vec(p, 0.0));
  for (const auto& row : x)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) s[i][j] += (row[i] - mu[i]) * (row[j] - mu[j]);
  for (auto& r : s)
    for (auto& v : r) v /= static_cast<double>(x.size());
  return s;
}

/// Ledoit-Wolf (2004) delta straight from its definition with the scaled
/// Frobenius inner product <A, B> = tr(A B^T) / p.
inline double ledoit_wolf_delta(const Mat& x) {
  const auto s = mle_covariance(x);
  const auto mu_vec = column_means(x);
  const std::size_t p = s.size();
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (std::size_t i = 0; i < p; ++i) m += s[i][i];
  m /= static_cast<double>(p);
  double d2 = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      const double t = s[i][j] - (i == j ? m : 0.0);
      d2 += t * t;
    }
  d2 /= static_cast<double>(p);
  double b_bar2 = 0.0;
  for (const auto& row : x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        const double t = (row[i] - mu_vec[i]) * (row[j] - mu_vec[j]) - s[i][j];
        acc += t * t;
      }
    b_bar2 += acc / static_cast<double>(p);
  }
  b_bar2 /= n * n;
  if (d2 <= 0.0) return 1.0;
  return std::min(b_bar2, d2) / d2;
}

/// Gauss-Jordan inverse with partial pivoting; throws on singular input.
inline Mat invert(Mat a) {
  const std::size_t n = a.size();
  Mat inv(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

inline double quad_form(const Mat& p, const Vec& d) {
  double q = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) q += d[i] * p[i][j] * d[j];
  return q;
}

inline double mahalanobis(const Vec& mu, const Mat& precision, const Vec& x) {
  Vec d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - mu[i];
  return std::sqrt(std::max(0.0, quad_form(precision, d)));
}

inline bool pairs_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
