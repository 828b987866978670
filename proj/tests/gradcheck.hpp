// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Central finite-difference gradient checker. The analytic gradient from one
// backward pass is compared against (f(x+h) - f(x-h)) / 2h element by
// element; use only on small tensors.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hyface/ag/tensor.hpp"

namespace testing_util {

struct GradCheckResult {
  bool ok = true;
  double worst_rel = 0.0;
  std::string detail;
};

// make_loss() must rebuild the graph from the current parameter values and
// return a scalar tensor.
inline GradCheckResult check_gradients(
    std::vector<hyface::ag::Tensor> params,
    const std::function<hyface::ag::Tensor()>& make_loss,
    double rel_tol = 1e-3, double h = 1e-5) {
  GradCheckResult res;

  // analytic pass
  for (auto& p : params) p.n->grad.assign(p.n->val.size(), 0.0);
  make_loss().backward();
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) {
    p.n->ensure_grad();
    analytic.push_back(p.n->grad);
  }

  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto& v = params[pi].n->val;
    for (size_t i = 0; i < v.size(); ++i) {
      const double keep = v[i];
      v[i] = keep + h;
      const double fp = make_loss().item();
      v[i] = keep - h;
      const double fm = make_loss().item();
      v[i] = keep;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[pi][i];
      const double err = std::abs(a - numeric);
      const double scale = std::max(std::abs(a), std::abs(numeric));
      const double rel = err / std::max(scale, 1e-8);
      if (err > rel_tol * scale + 1e-7) {
        res.ok = false;
        res.worst_rel = std::max(res.worst_rel, rel);
        if (res.detail.empty())
          res.detail = "param " + std::to_string(pi) + " elem " +
                       std::to_string(i) + ": analytic " + std::to_string(a) +
                       " vs numeric " + std::to_string(numeric);
      } else {
        res.worst_rel = std::max(res.worst_rel, rel);
      }
    }
  }
  return res;
}

}  // namespace testing_util
