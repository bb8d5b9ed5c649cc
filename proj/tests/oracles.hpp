// Independent reference implementations used only by the tests. None of these
// call into the library's numerical code.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

struct EigenPairs {
  std::vector<double> values;   // descending
  Matrix vectors;               // vectors[j] is the unit eigenvector for values[j]
};

/// Cyclic Jacobi rotations on a dense symmetric matrix.
inline EigenPairs jacobi_eigen(Matrix a, double tol = 1e-15, int max_sweeps = 100) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) {
        total += a[p][q] * a[p][q];
        if (p != q) off += a[p][q] * a[p][q];
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (auto j : order) {
    out.values.push_back(a[j][j]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][j];
    out.vectors.push_back(col);
  }
  return out;
}

/// Weighted sample covariance (dt-scaled) of the rows of `x`.
inline Matrix weighted_covariance(const Matrix& x, double dt) {
  const std::size_t n = x.size(), m = x[0].size();
  std::vector<double> mean(m, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < m; ++j) mean[j] += row[j] / static_cast<double>(n);
  Matrix c(m, std::vector<double>(m, 0.0));
  for (const auto& row : x)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) c[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
  for (auto& r : c)
    for (auto& e : r) e *= dt / static_cast<double>(n - 1);
  return c;
}

/// Strict interior local maxima of a sampled curve.
inline int count_peaks(const std::vector<double>& y) {
  int peaks = 0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) ++peaks;
  return peaks;
}

/// Grid indices of the strict interior local maxima.
inline std::vector<std::size_t> peak_locations(const std::vector<double>& y) {
  std::vector<std::size_t> at;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] > y[i + 1]) at.push_back(i);
  return at;
}

/// Expected squared-error importance of a feature equal to both the
/// prediction and the target, averaged over every permutation of y.
inline double exhaustive_identity_importance(std::vector<double> y) {
  const double n = static_cast<double>(y.size());
  // positions are permuted, not values, so repeated values count correctly
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total = 0.0;
  long count = 0;
  do {
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) loss += (y[idx[i]] - y[i]) * (y[idx[i]] - y[i]);
    total += loss / n;
    ++count;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return total / static_cast<double>(count);  // baseline loss is 0
}

/// True when `text` parses as XML with a single <svg> root.
inline bool well_formed_svg(const std::string& text) {
  try {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    boost::property_tree::read_xml(in, tree);
    return tree.size() == 1 && tree.begin()->first == "svg";
  } catch (...) {
    return false;
  }
}

}  // namespace oracle
