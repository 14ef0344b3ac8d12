#pragma once

#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "radt/rng.hpp"
#include "radt/tensor.hpp"
#include "radt/types.hpp"

namespace radt::test {

inline std::string data_dir() {
  const char* d = std::getenv("RADT_DATA_DIR");
  return d ? d : "data";
}

inline Trajectory random_trajectory(Rng& rng, int T, int d_s, int d_a,
                                    double lo = 0.0, double hi = 1.0) {
  Trajectory t;
  for (int i = 0; i < T; ++i) {
    StateVec s(d_s);
    for (auto& x : s) x = rng.uniform(lo, hi);
    t.states.push_back(std::move(s));
    ActionVec a(d_a);
    for (auto& x : a) x = rng.uniform(-1.0, 1.0);
    t.actions.push_back(std::move(a));
  }
  return t;
}

/// Independent membership oracle: plain double loop, no early exits shared
/// with the implementation path.
inline bool oracle_inside(const std::vector<double>& s, const AvoidBox& box) {
  bool inside = true;
  for (std::size_t i = 0; i < s.size(); ++i)
    inside = inside && (box.lower[i] <= s[i]) && (s[i] <= box.upper[i]);
  return inside;
}

inline int oracle_avoid_success(const Trajectory& t,
                                const std::vector<AvoidBox>& boxes) {
  int ok = 1;
  for (const auto& s : t.states)
    for (const auto& b : boxes)
      if (oracle_inside(s, b)) ok = 0;
  return ok;
}

/// Central-difference gradient check against the autodiff result.
/// `build_loss` must rebuild the graph from the given parameter tensors.
struct GradCheck {
  double max_rel_err = 0.0;
  int checked = 0;
};

inline GradCheck grad_check(
    std::vector<nn::Tensor> params,
    const std::function<nn::Tensor(std::vector<nn::Tensor>&)>& build_loss,
    double h = 1e-6, int max_per_param = 64) {
  for (auto& p : params) p.grad().clear();
  nn::Tensor loss = build_loss(params);
  nn::backward(loss);
  std::vector<std::vector<double>> grads;
  for (auto& p : params) {
    auto g = p.grad();
    g.resize(p.numel(), 0.0);
    grads.push_back(std::move(g));
  }

  GradCheck result;
  Rng pick(12345);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& p = params[pi];
    std::size_t n = p.numel();
    std::size_t count = std::min<std::size_t>(n, max_per_param);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t j = count == n ? c : pick.uniform_int(n);
      double orig = p.value()[j];
      p.value()[j] = orig + h;
      double up = build_loss(params).item();
      p.value()[j] = orig - h;
      double down = build_loss(params).item();
      p.value()[j] = orig;
      double fd = (up - down) / (2.0 * h);
      double ad = grads[pi][j];
      double denom = std::max({std::abs(fd), std::abs(ad), 1e-6});
      result.max_rel_err = std::max(result.max_rel_err, std::abs(fd - ad) / denom);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace radt::test
