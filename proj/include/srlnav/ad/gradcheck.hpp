#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "srlnav/ad/tape.hpp"
#include "srlnav/ad/tensor.hpp"

namespace srlnav::ad {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

struct GradCheckOptions {
  double h = 1e-5;
  double tol = 1e-4;
  // Gradients smaller than this are compared on an absolute scale.
  double floor = 1e-3;
  // 0 checks every element; otherwise at most this many per parameter, evenly strided.
  std::size_t max_per_param = 0;
};

/// Compares reverse-mode gradients of a scalar function with central differences.
///
/// `loss_fn` must rebuild the graph from the current parameter values on each
/// call. Parameters are perturbed in place and restored afterwards.
inline GradCheckReport gradient_check(const std::function<Tensor()>& loss_fn, std::vector<Tensor> params,
                                      GradCheckOptions opt = {}) {
  if (!(opt.h > 0.0)) throw std::invalid_argument("gradient_check: h must be positive");
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  Tensor loss = loss_fn();
  if (!std::isfinite(loss.item())) throw std::runtime_error("gradient_check: non-finite loss");
  backward(loss);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::vector<double> analytic = p.has_grad() ? std::vector<double>(p.grad().begin(), p.grad().end())
                                                : std::vector<double>(p.size(), 0.0);
    const std::size_t n = p.size();
    const std::size_t stride =
        (opt.max_per_param == 0 || n <= opt.max_per_param) ? 1 : (n + opt.max_per_param - 1) / opt.max_per_param;
    for (std::size_t j = 0; j < n; j += stride) {
      auto w = p.mutable_data();
      const double orig = w[j];
      w[j] = orig + opt.h;
      const double fp = loss_fn().item();
      w[j] = orig - opt.h;
      const double fm = loss_fn().item();
      w[j] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("gradient_check: non-finite loss under perturbation");
      const double numeric = (fp - fm) / (2.0 * opt.h);
      const double a = analytic[j];
      const double denom = std::max({std::abs(a), std::abs(numeric), opt.floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = pi;
        report.worst_index = j;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= opt.tol;
  for (auto& p : params) p.zero_grad();
  return report;
}

}  // namespace srlnav::ad
