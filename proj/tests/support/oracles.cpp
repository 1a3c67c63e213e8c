#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

Tensor random_tensor(const Shape& shape, std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<float> v(featpipe::element_count(shape));
  for (auto& e : v) e = static_cast<float>(dist(gen));
  return Tensor(shape, std::move(v));
}

Tensor conv2d(const Tensor& x, const Tensor& w, const std::vector<float>& b, std::size_t stride,
              std::size_t pad, std::size_t groups) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t O = w.dim(0), Cg = w.dim(1), KH = w.dim(2), KW = w.dim(3);
  const std::size_t OH = (H + 2 * pad - KH) / stride + 1;
  const std::size_t OW = (W + 2 * pad - KW) / stride + 1;
  const std::size_t Og = O / groups;
  (void)C;
  Tensor out({O, OH, OW});
  for (std::size_t o = 0; o < O; ++o) {
    const std::size_t g = o / Og;
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        double acc = b[o];
        for (std::size_t c = 0; c < Cg; ++c) {
          for (std::size_t ky = 0; ky < KH; ++ky) {
            for (std::size_t kx = 0; kx < KW; ++kx) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(H) || ix >= static_cast<long>(W)) continue;
              const double xv = x.data()[((g * Cg + c) * H + static_cast<std::size_t>(iy)) * W +
                                         static_cast<std::size_t>(ix)];
              const double wv = w.data()[((o * Cg + c) * KH + ky) * KW + kx];
              acc += xv * wv;
            }
          }
        }
        out.data()[(o * OH + oy) * OW + ox] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Tensor lrn(const Tensor& x, double k, std::size_t n, double alpha, double beta) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  Tensor out(x.shape());
  const long half = static_cast<long>(n / 2);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < H * W; ++i) {
      double sum = 0.0;
      for (long j = static_cast<long>(c) - half; j <= static_cast<long>(c) + half; ++j) {
        if (j < 0 || j >= static_cast<long>(C)) continue;
        const double v = x.data()[static_cast<std::size_t>(j) * H * W + i];
        sum += v * v;
      }
      const double v = x.data()[c * H * W + i];
      out.data()[c * H * W + i] = static_cast<float>(v / std::pow(k + alpha / static_cast<double>(n) * sum, beta));
    }
  }
  return out;
}

Tensor max_pool(const Tensor& x, std::size_t size, std::size_t stride) {
  const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const std::size_t OH = (H - size) / stride + 1, OW = (W - size) / stride + 1;
  Tensor out({C, OH, OW});
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t oy = 0; oy < OH; ++oy) {
      for (std::size_t ox = 0; ox < OW; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        for (std::size_t dy = 0; dy < size; ++dy) {
          for (std::size_t dx = 0; dx < size; ++dx) {
            best = std::max(best, x.data()[(c * H + oy * stride + dy) * W + ox * stride + dx]);
          }
        }
        out.data()[(c * OH + oy) * OW + ox] = best;
      }
    }
  }
  return out;
}

Tensor fully_connected(const Tensor& x, const Tensor& w, const std::vector<float>& b) {
  const std::size_t M = w.dim(0), N = w.dim(1);
  Tensor out({M});
  for (std::size_t m = 0; m < M; ++m) {
    double acc = b[m];
    for (std::size_t n = 0; n < N; ++n) acc += static_cast<double>(w.data()[m * N + n]) * x.data()[n];
    out.data()[m] = static_cast<float>(acc);
  }
  return out;
}

double relative_error(const Tensor& got, const Tensor& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num = std::max(num, std::abs(static_cast<double>(got.data()[i]) - want.data()[i]));
    den = std::max(den, std::abs(static_cast<double>(want.data()[i])));
  }
  return den > 0.0 ? num / den : num;
}

double dual_value(const std::vector<Point>& x, const std::vector<int>& y, const std::vector<double>& alpha,
                  const KernelFn& kernel) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lin += alpha[i];
    for (std::size_t j = 0; j < x.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(x[i], x[j]);
  }
  return lin - 0.5 * quad;
}

DualOptimum brute_force_dual(const std::vector<Point>& x, const std::vector<int>& y, double C,
                             const KernelFn& kernel, std::size_t grid) {
  const std::size_t n = x.size();
  const double step = C / static_cast<double>(grid);
  std::vector<double> alpha(n, 0.0), best_alpha(n, 0.0);
  double best = 0.0;  // alpha = 0 is feasible
  // Enumerate the first n-1 multipliers on the grid.
  std::vector<std::size_t> idx(n - 1, 0);
  while (true) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      alpha[i] = static_cast<double>(idx[i]) * step;
      s += alpha[i] * y[i];
    }
    alpha[n - 1] = -s * y[n - 1];
    if (alpha[n - 1] >= -1e-12 && alpha[n - 1] <= C + 1e-12) {
      alpha[n - 1] = std::clamp(alpha[n - 1], 0.0, C);
      const double v = dual_value(x, y, alpha, kernel);
      if (v > best) {
        best = v;
        best_alpha = alpha;
      }
    }
    std::size_t d = 0;
    while (d < n - 1 && ++idx[d] > grid) idx[d++] = 0;
    if (d == n - 1) break;
  }
  // Pattern search: moving a_i by +t*y_i and a_j by -t*y_j keeps sum(a y).
  double t = step;
  alpha = best_alpha;
  while (t > 1e-10) {
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        std::vector<double> trial = alpha;
        trial[i] += t * y[i];
        trial[j] -= t * y[j];
        if (trial[i] < 0 || trial[i] > C || trial[j] < 0 || trial[j] > C) continue;
        const double v = dual_value(x, y, trial, kernel);
        if (v > best + 1e-15) {
          best = v;
          alpha = trial;
          improved = true;
        }
      }
    }
    if (!improved) t *= 0.5;
  }
  DualOptimum out{alpha, best, 0.0};
  // Bias from free multipliers, else the midpoint of the feasible interval.
  auto grad = [&](std::size_t i) {
    double f = 0.0;
    for (std::size_t j = 0; j < n; ++j) f += alpha[j] * y[j] * kernel(x[j], x[i]);
    return f;
  };
  const double eps = 1e-6 * C;
  double sum = 0.0;
  std::size_t free = 0;
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - grad(i);  // b that puts point i on the margin
    if (alpha[i] > eps && alpha[i] < C - eps) {
      sum += r;
      ++free;
    } else if ((alpha[i] <= eps) == (y[i] > 0)) {
      lo = std::max(lo, r);  // y f >= 1 forces b >= r for positives at 0 / negatives at C
    } else {
      hi = std::min(hi, r);
    }
  }
  out.bias = free ? sum / static_cast<double>(free) : 0.5 * (lo + hi);
  return out;
}

double decision(const std::vector<Point>& x, const std::vector<int>& y, const DualOptimum& opt,
                const KernelFn& kernel, const Point& probe) {
  double f = opt.bias;
  for (std::size_t i = 0; i < x.size(); ++i) f += opt.alpha[i] * y[i] * kernel(x[i], probe);
  return f;
}

}  // namespace oracle
