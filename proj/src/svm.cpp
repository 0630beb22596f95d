#include "phasor_sentinel/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>
#include <unordered_set>

#include "phasor_sentinel/parallel.hpp"

namespace phasor_sentinel {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  if (x.size() != y.size()) throw ValidationError("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

// LRU cache of kernel rows K(x_i, .) over the whole training set.
class KernelCache {
 public:
  KernelCache(const FeatureMatrix& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma), n_(x.rows()) {
    const std::size_t row_bytes = std::max<std::size_t>(1, n_ * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->values;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().key);
      lru_.splice(lru_.begin(), lru_, std::prev(lru_.end()));
    } else {
      lru_.emplace_front();
      lru_.front().values.resize(n_);
    }
    Entry& e = lru_.front();
    e.key = i;
    fill(i, e.values);
    index_[i] = lru_.begin();
    return e.values;
  }

 private:
  struct Entry {
    std::size_t key = 0;
    std::vector<double> values;
  };

  void fill(std::size_t i, std::vector<double>& out) const {
    const auto xi = x_.row(i);
    for (std::size_t t = 0; t < n_; ++t) out[t] = rbf_kernel(xi, x_.row(t), gamma_);
  }

  const FeatureMatrix& x_;
  double gamma_;
  std::size_t n_;
  std::size_t capacity_;
  std::list<Entry> lru_;
  std::unordered_map<std::size_t, std::list<Entry>::iterator> index_;
};

void check_training_input(const FeatureMatrix& x, std::span<const int> y) {
  if (x.rows() != y.size()) throw ValidationError("feature/label count mismatch");
  if (x.dim == 0) throw ValidationError("empty feature vectors");
  bool pos = false;
  bool neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw ValidationError("labels must be -1 or +1");
    }
  }
  if (!pos || !neg) throw ValidationError("training set needs both labels");
  for (double v : x.values) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  }
}

}  // namespace

DualSolution solve_dual(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params) {
  check_training_input(x, y);
  if (!(params.C > 0) || !(params.gamma > 0)) throw ValidationError("C and gamma must be positive");
  if (!(params.tol > 0)) throw ValidationError("tol must be positive");
  const std::size_t n = x.rows();
  constexpr double kTau = 1e-12;

  std::vector<double> cap(n);
  for (std::size_t t = 0; t < n; ++t) {
    cap[t] = params.C * (y[t] > 0 ? params.weight_spoofed : params.weight_normal);
  }
  std::vector<double> alpha(n, 0.0);
  // Gradient of 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
  std::vector<double> grad(n, -1.0);
  KernelCache cache(x, params.gamma, params.cache_mb << 20);

  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < cap[t] : alpha[t] > 0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < cap[t]; };

  const std::int64_t max_iter =
      static_cast<std::int64_t>(std::max(1, params.max_passes)) * static_cast<std::int64_t>(n);
  std::int64_t iter = 0;
  double violation = 0.0;
  for (;;) {
    // Maximal violating pair.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    std::size_t i = n;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    violation = (i == n || j == n) ? 0.0 : g_max - g_min;
    if (violation < params.tol) break;
    if (iter >= max_iter) {
      double obj = 0.0;
      for (std::size_t t = 0; t < n; ++t) obj += 0.5 * alpha[t] * (1.0 - grad[t]);
      throw ConvergenceError("SMO did not converge within the iteration cap", iter, violation, obj);
    }
    ++iter;

    const auto& ki = cache.row(i);
    const auto& kj = cache.row(j);
    const double yi = y[i];
    const double yj = y[j];
    const double qij = yi * yj * ki[j];
    const double ci = cap[i];
    const double cj = cap[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double& ai = alpha[i];
    double& aj = alpha[j];

    if (y[i] != y[j]) {
      double quad = ki[i] + kj[j] + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) {
          aj = 0;
          ai = diff;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = -diff;
      }
      if (diff > ci - cj) {
        if (ai > ci) {
          ai = ci;
          aj = ci - diff;
        }
      } else if (aj > cj) {
        aj = cj;
        ai = cj + diff;
      }
    } else {
      double quad = ki[i] + kj[j] - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) {
          ai = ci;
          aj = sum - ci;
        }
      } else if (aj < 0) {
        aj = 0;
        ai = sum;
      }
      if (sum > cj) {
        if (aj > cj) {
          aj = cj;
          ai = sum - cj;
        }
      } else if (ai < 0) {
        ai = 0;
        aj = sum;
      }
    }

    const double dai = (ai - old_ai) * yi;
    const double daj = (aj - old_aj) * yj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (ki[t] * dai + kj[t] * daj);
  }

  // Bias from free vectors; midpoint of the feasible interval otherwise.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= cap[t]) {
      if (y[t] < 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

  DualSolution sol;
  sol.bias = -rho;
  sol.iterations = iter;
  sol.violation = violation;
  for (std::size_t t = 0; t < n; ++t) sol.objective += 0.5 * alpha[t] * (1.0 - grad[t]);
  sol.alpha = std::move(alpha);
  return sol;
}

double dual_objective(const FeatureMatrix& x, std::span<const int> y, std::span<const double> alpha,
                      double gamma) {
  const std::size_t n = x.rows();
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf_kernel(x.row(i), x.row(j), gamma);
    }
  }
  return linear - 0.5 * quad;
}

SvmModel train_svm(const FeatureMatrix& x, std::span<const int> y, const SvmParams& params) {
  check_training_input(x, y);
  SvmModel model;
  model.standardizer = fit_standardizer(x);
  FeatureMatrix z = x;
  model.standardizer.apply_in_place(z);
  const DualSolution sol = solve_dual(z, y, params);

  model.C = params.C;
  model.gamma = params.gamma;
  model.weight_spoofed = params.weight_spoofed;
  model.weight_normal = params.weight_normal;
  model.bias = sol.bias;
  model.support_vectors = FeatureMatrix(x.dim);
  for (std::size_t t = 0; t < sol.alpha.size(); ++t) {
    if (sol.alpha[t] > 1e-8) {
      model.support_vectors.append(z.row(t));
      model.coef.push_back(sol.alpha[t] * y[t]);
      const double cap = params.C * (y[t] > 0 ? params.weight_spoofed : params.weight_normal);
      if (sol.alpha[t] >= cap) ++model.diagnostics.bounded_support_vectors;
    }
  }
  model.diagnostics.iterations = sol.iterations;
  model.diagnostics.violation = sol.violation;
  model.diagnostics.objective = sol.objective;
  model.meta.train_examples = static_cast<std::int64_t>(x.rows());
  return model;
}

namespace {

double margin_standardized(const SvmModel& m, std::span<const double> z) {
  double s = m.bias;
  const std::size_t nsv = m.coef.size();
  for (std::size_t t = 0; t < nsv; ++t) s += m.coef[t] * rbf_kernel(m.support_vectors.row(t), z, m.gamma);
  return s;
}

double margin_raw(const SvmModel& m, std::span<const double> x, std::vector<double>& scratch) {
  scratch.assign(x.begin(), x.end());
  m.standardizer.apply_in_place(scratch);
  return margin_standardized(m, scratch);
}

}  // namespace

Decision decide(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw ValidationError("decide: dimension mismatch");
  std::vector<double> scratch;
  const double m = margin_raw(model, x, scratch);
  return {label_of(m), m};
}

std::vector<double> decide_batch(const SvmModel& model, const FeatureMatrix& x, int jobs) {
  if (x.dim != model.dim()) throw ValidationError("decide: dimension mismatch");
  const auto n = static_cast<std::int64_t>(x.rows());
  std::vector<double> out(x.rows());
  if (jobs <= 0) jobs = worker_count();
#pragma omp parallel num_threads(jobs)
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = margin_raw(model, x.row(i), scratch);
  }
  return out;
}

std::vector<double> decide_batch_serial(const SvmModel& model, const FeatureMatrix& x) {
  if (x.dim != model.dim()) throw ValidationError("decide: dimension mismatch");
  std::vector<double> out(x.rows());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = margin_raw(model, x.row(i), scratch);
  return out;
}

GridResult grid_search(const std::vector<GridData>& data, std::span<const double> c_grid,
                       std::span<const double> gamma_grid, const SvmParams& base, int jobs) {
  if (data.empty() || c_grid.empty() || gamma_grid.empty()) throw ValidationError("grid_search: empty grid");
  for (const auto& d : data) {
    std::unordered_set<int> train_minutes(d.train.minute.begin(), d.train.minute.end());
    for (int m : d.validate.minute) {
      if (train_minutes.count(m)) {
        throw ValidationError("grid_search: minute " + std::to_string(m) + " is in both train and validate");
      }
    }
  }
  GridResult result;
  for (const auto& d : data) {
    for (double c : c_grid) {
      for (double g : gamma_grid) {
        GridCell cell;
        cell.feature_set = d.feature_set;
        cell.C = c;
        cell.gamma = g;
        result.cells.push_back(cell);
      }
    }
  }
  const std::size_t per_data = c_grid.size() * gamma_grid.size();
  parallel_for(
      static_cast<std::int64_t>(result.cells.size()),
      [&](std::int64_t k) {
        GridCell& cell = result.cells[static_cast<std::size_t>(k)];
        const GridData& d = data[static_cast<std::size_t>(k) / per_data];
        SvmParams p = base;
        p.C = cell.C;
        p.gamma = cell.gamma;
        const SvmModel model = train_svm(d.train.x, d.train.y, p);
        const auto margins = decide_batch_serial(model, d.validate.x);
        for (std::size_t t = 0; t < margins.size(); ++t) {
          cell.counts.add(label_of(margins[t]) == Label::Spoofed, d.validate.y[t] > 0);
        }
        const Metrics m = metrics(cell.counts);
        cell.f1 = m.f1;
        cell.f1_undefined = m.degenerate;
        cell.support_vectors = model.coef.size();
      },
      jobs);
  for (std::size_t k = 1; k < result.cells.size(); ++k) {
    if (result.cells[k].f1 > result.cells[result.best].f1) result.best = k;
  }
  return result;
}

}  // namespace phasor_sentinel
