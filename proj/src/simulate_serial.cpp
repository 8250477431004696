// Serial reference kernels; the parallel versions must match them bit for bit.
#include "coopmine/simulate.hpp"

namespace coopmine {

std::size_t step_serial(const SimKernel& kernel, std::size_t t, std::span<const std::uint8_t> actions,
                        std::size_t cooperators, std::span<std::uint8_t> next,
                        std::span<double> utility) {
  const auto& pay = kernel.payoffs();
  std::size_t count = 0;
  for (std::size_t i = 0; i < kernel.n(); ++i) {
    const bool own = actions[i] != 0;
    const std::size_t j = cooperators - (own ? 1 : 0);
    utility[i] += own ? pay.a[j] : pay.b[j];
    next[i] = kernel.next_action(i, t, own, j) ? 1 : 0;
    count += next[i];
  }
  return count;
}

BatchResult batch_serial(const SimConfig& config, std::size_t histogram_bins) {
  validate_sim_config(config);
  BatchResult out;
  out.trajectories.reserve(config.runs);
  for (std::size_t r = 0; r < config.runs; ++r) out.trajectories.push_back(run(config, r, StepMode::Serial));
  out.summary = summarize(out.trajectories, histogram_bins);
  return out;
}

}  // namespace coopmine
