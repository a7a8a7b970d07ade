#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bdss/kernels.hpp"
#include "bdss/tensor.hpp"

namespace bdss {

template <typename T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

template <typename T>
struct AdamState {
  std::vector<std::vector<T>> first_moment;
  std::vector<std::vector<T>> second_moment;
  long long step_count = 0;

  static AdamState for_params(const std::vector<Tensor<T>>& params) {
    AdamState st;
    st.first_moment.reserve(params.size());
    st.second_moment.reserve(params.size());
    for (const auto& p : params) {
      st.first_moment.emplace_back(p.numel(), T(0));
      st.second_moment.emplace_back(p.numel(), T(0));
    }
    return st;
  }
};

// Standard bias-corrected Adam update, in place on the parameter leaves.
// A parameter with no gradient buffer is treated as zero gradient.
template <typename T>
void adam_step(std::vector<Tensor<T>>& params, const AdamConfig<T>& cfg, AdamState<T>& state) {
  if (cfg.lr <= T(0)) throw config_error("adam: lr must be positive");
  if (state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size())
    throw config_error("adam: state tracks " + std::to_string(state.first_moment.size()) +
                       " parameters, got " + std::to_string(params.size()));
  const long long t = state.step_count + 1;
  const T bc1 = T(1) / static_cast<T>(1.0 - std::pow(static_cast<double>(cfg.beta1), t));
  const T bc2 = T(1) / static_cast<T>(1.0 - std::pow(static_cast<double>(cfg.beta2), t));
  const auto& K = kernels::active<T>();
  std::vector<T> zeros;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    const std::size_t n = p.numel();
    if (state.first_moment[i].size() != n)
      throw config_error("adam: parameter " + std::to_string(i) + " has " + std::to_string(n) +
                         " values but state tracks " +
                         std::to_string(state.first_moment[i].size()));
    const T* g;
    if (p.has_grad()) {
      if (p.grad().size() != n)
        throw config_error("adam: parameter " + std::to_string(i) + " gradient size mismatch");
      g = p.grad().data();
    } else {
      if (zeros.size() < n) zeros.assign(n, T(0));
      g = zeros.data();
    }
    K.adam(n, p.values().data(), g, state.first_moment[i].data(), state.second_moment[i].data(),
           cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, bc1, bc2);
  }
  state.step_count = t;
}

}  // namespace bdss
