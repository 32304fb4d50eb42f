#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>

namespace emview::oracle {

Vec to_eigen(const DenseVector& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Mat to_eigen(const DenseMatrix& m) {
  Mat out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  }
  return out;
}

std::vector<Vec> to_eigen(const std::vector<DenseVector>& xs) {
  std::vector<Vec> out;
  for (const auto& x : xs) out.push_back(to_eigen(x));
  return out;
}

std::vector<Gaussian> from_params(const em::GmmParams& p) {
  std::vector<Gaussian> out;
  for (const auto& c : p.components) out.push_back({c.pie, to_eigen(c.mean), to_eigen(c.cov)});
  return out;
}

em::GmmParams to_params(const std::vector<Gaussian>& g) {
  em::GmmParams p;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto d = static_cast<std::size_t>(g[k].mean.size());
    em::GmmComponent c{static_cast<std::int64_t>(k + 1), g[k].pie, DenseVector(d), DenseMatrix(d, d)};
    for (std::size_t i = 0; i < d; ++i) {
      c.mean[i] = g[k].mean(static_cast<Eigen::Index>(i));
      for (std::size_t j = 0; j < d; ++j) c.cov(i, j) = g[k].cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    p.components.push_back(std::move(c));
  }
  return p;
}

double max_deviation(const em::GmmParams& p, const std::vector<Gaussian>& g) {
  if (p.size() != g.size()) return INFINITY;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto& c = p.components[k];
    worst = std::max(worst, std::abs(c.pie - g[k].pie));
    worst = std::max(worst, (to_eigen(c.mean) - g[k].mean).cwiseAbs().maxCoeff());
    worst = std::max(worst, (to_eigen(c.cov) - g[k].cov).cwiseAbs().maxCoeff());
  }
  return worst;
}

double gauss_pdf(const Vec& x, const Vec& mean, const Mat& cov) {
  const double d = static_cast<double>(x.size());
  const Vec diff = x - mean;
  const double q = diff.dot(cov.inverse() * diff);
  const double v = std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * std::numbers::pi, d) * cov.determinant());
  return std::max(v, 1e-300);
}

std::vector<std::vector<double>> responsibilities(const std::vector<Gaussian>& g, const std::vector<Vec>& xs) {
  std::vector<std::vector<double>> r;
  for (const auto& x : xs) {
    std::vector<double> row;
    double total = 0.0;
    for (const auto& c : g) {
      row.push_back(c.pie * gauss_pdf(x, c.mean, c.cov));
      total += row.back();
    }
    for (double& v : row) v /= total;
    r.push_back(std::move(row));
  }
  return r;
}

std::vector<Gaussian> em_step(const std::vector<Gaussian>& g, const std::vector<Vec>& xs) {
  const auto r = responsibilities(g, xs);
  const auto d = xs.front().size();
  std::vector<Gaussian> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    double nk = 0.0;
    Vec mean = Vec::Zero(d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      nk += r[i][k];
      mean += r[i][k] * xs[i];
    }
    mean /= nk;
    Mat cov = Mat::Zero(d, d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Vec diff = xs[i] - mean;
      cov += r[i][k] * diff * diff.transpose();
    }
    cov /= nk;
    out.push_back({nk / static_cast<double>(xs.size()), mean, cov});
  }
  return out;
}

double log_likelihood(const std::vector<Gaussian>& g, const std::vector<Vec>& xs) {
  double ll = 0.0;
  for (const auto& x : xs) {
    double s = 0.0;
    for (const auto& c : g) s += c.pie * gauss_pdf(x, c.mean, c.cov);
    ll += std::log(std::max(s, 1e-300));
  }
  return ll;
}

double normal_pdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return std::max(std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi)), 1e-300);
}

namespace {

Vec weighted_fit(const std::vector<Vec>& xs, const std::vector<double>& ys, const std::vector<double>& w) {
  const auto d = xs.front().size();
  Mat a = Mat::Zero(d, d);
  Vec b = Vec::Zero(d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    a += w[i] * xs[i] * xs[i].transpose();
    b += w[i] * ys[i] * xs[i];
  }
  return a.fullPivLu().solve(b);
}

}  // namespace

std::vector<Line> mlr_step(const std::vector<Line>& lines, const std::vector<Vec>& xs, const std::vector<double>& ys,
                           double sigma_min) {
  const std::size_t n = xs.size();
  std::vector<std::vector<double>> r(lines.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      r[k][i] = lines[k].pie * normal_pdf(ys[i], xs[i].dot(lines[k].beta), lines[k].sigma);
      total += r[k][i];
    }
    for (auto& rk : r) rk[i] /= total;
  }
  std::vector<Line> out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    double nk = 0.0;
    for (double p : r[k]) nk += p;
    const Vec beta = weighted_fit(xs, ys, r[k]);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) sse += r[k][i] * std::pow(ys[i] - xs[i].dot(beta), 2);
    out.push_back({nk / static_cast<double>(n), beta, std::max(std::sqrt(sse / nk), sigma_min)});
  }
  return out;
}

double mlr_log_likelihood(const std::vector<Line>& lines, const std::vector<Vec>& xs, const std::vector<double>& ys) {
  double ll = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double s = 0.0;
    for (const auto& l : lines) s += l.pie * normal_pdf(ys[i], xs[i].dot(l.beta), l.sigma);
    ll += std::log(std::max(s, 1e-300));
  }
  return ll;
}

std::vector<Expert> moe_step(const std::vector<Expert>& experts, const std::vector<Vec>& xs,
                             const std::vector<double>& ys, double sigma_min) {
  const std::size_t n = xs.size();
  const std::size_t k_count = experts.size();
  std::vector<std::vector<double>> r(k_count, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Vec logits(static_cast<Eigen::Index>(k_count));
    for (std::size_t k = 0; k < k_count; ++k) logits(static_cast<Eigen::Index>(k)) = xs[i].dot(experts[k].theta);
    const Vec gate = (logits.array() - logits.maxCoeff()).exp();
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      r[k][i] = gate(static_cast<Eigen::Index>(k)) * normal_pdf(ys[i], xs[i].dot(experts[k].beta), experts[k].sigma);
      total += r[k][i];
    }
    for (auto& rk : r) rk[i] /= total;
  }
  std::vector<Expert> out;
  const std::vector<double> ones(n, 1.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    double nk = 0.0;
    for (double p : r[k]) nk += p;
    const Vec beta = weighted_fit(xs, ys, r[k]);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) sse += r[k][i] * std::pow(ys[i] - xs[i].dot(beta), 2);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) {
      target[i] = std::log(std::max(r[k][i], 1e-300) / std::max(r[k_count - 1][i], 1e-300));
    }
    out.push_back({weighted_fit(xs, target, ones), beta, std::max(std::sqrt(sse / nk), sigma_min)});
  }
  return out;
}

std::set<std::pair<std::int64_t, std::int64_t>> bfs_closure(const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
  std::map<std::int64_t, std::vector<std::int64_t>> adj;
  for (const auto& [f, t] : edges) adj[f].push_back(t);
  std::set<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& [start, _] : adj) {
    std::set<std::int64_t> seen;
    std::queue<std::int64_t> q;
    for (auto t : adj[start]) {
      if (seen.insert(t).second) q.push(t);
    }
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      out.insert({start, u});
      auto it = adj.find(u);
      if (it == adj.end()) continue;
      for (auto t : it->second) {
        if (seen.insert(t).second) q.push(t);
      }
    }
  }
  return out;
}

Mat dense(const Relation& triples, std::size_t rows, std::size_t cols) {
  Mat m = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (const Row& r : triples.rows()) m(r[0].as_int() - 1, r[1].as_int() - 1) += r[2].as_real();
  return m;
}

}  // namespace emview::oracle
