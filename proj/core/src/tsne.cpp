// Copyright 2026 The coughscreen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coughscreen/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "coughscreen/error.hpp"
#include "coughscreen/io.hpp"
#include "coughscreen/parallel.hpp"
#include "coughscreen/rng.hpp"

namespace coughscreen {
namespace {

constexpr double kInitStd = 1e-4;
constexpr double kMinGain = 0.01;

void check_square(const Matrix<double>& d) {
  if (d.rows() != d.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "distance matrix must be square");
  }
  if (d.rows() < 2) throw Error(ErrorCode::kTooFewSamples, "need at least two points");
}

/// Fills row of conditional probabilities at precision beta and returns its
/// entropy in bits. `shift` is the smallest off-diagonal distance; removing
/// it keeps exp() away from underflow without changing the distribution.
double row_distribution(std::span<const double> d, std::size_t self, double beta,
                        double shift, std::span<double> out) {
  double sum = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    out[j] = j == self ? 0.0 : std::exp(-beta * (d[j] - shift));
    sum += out[j];
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    out[j] /= sum;
    weighted += out[j] * (d[j] - shift);
  }
  // H = log(sum) + beta * E[d] in nats.
  return (std::log(sum) + beta * weighted) / std::log(2.0);
}

}  // namespace

void TsneConfig::validate(std::size_t n) const {
  auto bad = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "t-SNE config: " + what);
  };
  if (n < 10) {
    throw Error(ErrorCode::kTooFewSamples, "t-SNE needs at least 10 points");
  }
  if (!(perplexity > 0.0)) bad("perplexity must be positive");
  if (!(perplexity < static_cast<double>(n) / 3.0)) bad("perplexity must be below N/3");
  if (exaggeration_iterations < 0) bad("exaggeration duration must be >= 0");
  if (iterations < exaggeration_iterations) bad("iterations must be >= exaggeration duration");
  if (!(learning_rate > 0.0)) bad("learning rate must be positive");
  if (!(early_exaggeration >= 1.0)) bad("exaggeration factor must be >= 1");
}

Matrix<double> squared_distances(const Matrix<double>& x, unsigned jobs) {
  const std::size_t n = x.rows();
  Matrix<double> d(n, n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto xj = x.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < xi.size(); ++c) {
        const double diff = xi[c] - xj[c];
        s += diff * diff;
      }
      d(i, j) = s;
    }
  });
  return d;
}

Matrix<double> conditional_affinities(const Matrix<double>& distances_sq, double perplexity) {
  check_square(distances_sq);
  if (!(perplexity > 0.0)) throw Error(ErrorCode::kInvalidArgument, "perplexity must be positive");
  const std::size_t n = distances_sq.rows();
  const double target = std::log2(perplexity);
  Matrix<double> p(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = distances_sq.row(i);
    double shift = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (!std::isfinite(d[j]) || d[j] < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "distances must be finite and nonnegative");
      }
      shift = std::min(shift, d[j]);
      largest = std::max(largest, d[j]);
    }
    if (largest == 0.0) {
      throw Error(ErrorCode::kDegenerateDistances,
                  "row " + std::to_string(i) + " has only zero distances");
    }
    double beta = 1.0 / largest;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    auto row = p.row(i);
    for (int step = 0; step < kPerplexityMaxSteps; ++step) {
      const double h = row_distribution(d, i, beta, shift, row);
      const double diff = h - target;
      if (std::abs(diff) < kPerplexityTolerance) break;
      if (diff > 0.0) {
        // Too flat: sharpen.
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
      } else {
        hi = beta;
        beta = (beta + lo) / 2.0;
      }
    }
    row_distribution(d, i, beta, shift, row);
  }
  return p;
}

Matrix<double> perplexity_calibrate(const Matrix<double>& distances_sq, double perplexity) {
  const Matrix<double> cond = conditional_affinities(distances_sq, perplexity);
  const std::size_t n = cond.rows();
  Matrix<double> p(n, n, 0.0);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p(i, j) = std::max((cond(i, j) + cond(j, i)) / denom, kAffinityFloor);
    }
  }
  return p;
}

Projection tsne(const Matrix<double>& features, const TsneConfig& cfg) {
  const std::size_t n = features.rows();
  cfg.validate(n);
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNaNFeature, "t-SNE input must be finite");
  }
  const Matrix<double> p = perplexity_calibrate(squared_distances(features, cfg.jobs),
                                                cfg.perplexity);

  constexpr std::size_t dims = kTsneOutputDim;
  Matrix<double> y(n, dims);
  Rng rng(derive_seed(cfg.seed, "tsne"));
  for (double& v : y.data()) v = rng.normal(0.0, kInitStd);
  Matrix<double> update(n, dims, 0.0);
  Matrix<double> gains(n, dims, 1.0);
  Matrix<double> grad(n, dims, 0.0);
  Matrix<double> num(n, n, 0.0);
  std::vector<double> row_sum(n);

  auto recenter = [&]() {
    for (std::size_t c = 0; c < dims; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, c) -= mean;
    }
  };

  // Student-t kernel; returns its normalizer Z.
  auto kernel = [&]() {
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          num(i, j) = 0.0;
          continue;
        }
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
        s += num(i, j);
      }
      row_sum[i] = s;
    });
    double z = 0.0;
    for (double s : row_sum) z += s;
    return z;
  };

  auto kl = [&](double z) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double q = std::max(num(i, j) / z, kAffinityFloor);
        total += p(i, j) * std::log(p(i, j) / q);
      }
    }
    return total;
  };

  Projection proj;
  proj.kl_history.reserve(static_cast<std::size_t>(cfg.iterations) + 1);
  recenter();
  double z = kernel();
  proj.kl_history.push_back(kl(z));

  for (int it = 0; it < cfg.iterations; ++it) {
    const double exaggeration = it < cfg.exaggeration_iterations ? cfg.early_exaggeration : 1.0;
    const double momentum =
        it < cfg.momentum_switch_iteration ? cfg.initial_momentum : cfg.final_momentum;
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
      double g0 = 0.0;
      double g1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double mult = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        g0 += mult * (y(i, 0) - y(j, 0));
        g1 += mult * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * g0;
      grad(i, 1) = 4.0 * g1;
    });
    for (std::size_t k = 0; k < n * dims; ++k) {
      double& gain = gains.data()[k];
      const double g = grad.data()[k];
      double& u = update.data()[k];
      gain = (g > 0.0) != (u > 0.0) ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, kMinGain);
      u = momentum * u - cfg.learning_rate * gain * g;
      y.data()[k] += u;
    }
    recenter();
    z = kernel();
    proj.kl_history.push_back(kl(z));
  }
  for (double v : y.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInternal, "t-SNE diverged");
  }
  proj.coords = std::move(y);
  return proj;
}

Projection tsne(const Dataset& data, const TsneConfig& cfg) {
  Projection proj = tsne(data.features, cfg);
  proj.ids = data.ids;
  proj.labels = data.labels;
  return proj;
}

std::string scatter_csv(const Projection& proj) {
  std::string out = "id,x,y,label\n";
  char buf[96];
  for (std::size_t i = 0; i < proj.coords.rows(); ++i) {
    out += i < proj.ids.size() ? proj.ids[i] : std::to_string(i);
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g,", proj.coords(i, 0), proj.coords(i, 1));
    out += buf;
    if (i < proj.labels.size() && proj.labels[i] != Label::kUnknown) {
      out += is_positive(proj.labels[i]) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

void export_scatter(const Projection& proj, const std::filesystem::path& path) {
  write_file_text(path, scatter_csv(proj));
}

std::string kl_history_csv(const Projection& proj) {
  std::string out = "iter,kl\n";
  char buf[64];
  for (std::size_t t = 0; t < proj.kl_history.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", t, proj.kl_history[t]);
    out += buf;
  }
  return out;
}

}  // namespace coughscreen
