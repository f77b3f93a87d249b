#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "distillnet/nn/gradcheck.hpp"

namespace distillnet {

struct ComponentCheck {
  std::string name;  // e.g. "conv.kernels"
  nn::GradcheckReport report;
};

/// conv, dense, maxpool, lstm, bilstm, softmax_tau, ce, kld, kd_total, plus
/// dropout, time_dense, cnn_net and rnn_net (whole small networks).
std::vector<std::string> gradcheck_components();

/// Finite-difference checks of every input and parameter of one component on
/// random data drawn from `seed`. Throws ConfigError for unknown ids.
std::vector<ComponentCheck> run_gradcheck(std::string_view component, std::uint64_t seed);

}  // namespace distillnet
