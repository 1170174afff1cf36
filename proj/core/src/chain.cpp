#include <chrono>
#include <cmath>

#include "mmmc/samplers.hpp"

namespace mmmc {

double ChainTrace::mean() const {
  return n_steps ? observable_sum / static_cast<double>(n_steps) : std::nan("");
}

double ChainTrace::macro_acceptance() const {
  return macro_proposed ? static_cast<double>(macro_accepted) / static_cast<double>(macro_proposed)
                        : 0.0;
}

double ChainTrace::micro_acceptance() const {
  return micro_proposed ? static_cast<double>(micro_accepted) / static_cast<double>(micro_proposed)
                        : 0.0;
}

ChainTrace run_chain(ChainKernel& kernel, MicroState x0, std::uint64_t n_steps,
                     const Observable& observable, RngStream& rng, const ChainOptions& options) {
  if (n_steps == 0) throw std::invalid_argument("run_chain: n_steps must be at least 1");
  ChainTrace trace;
  trace.seed = rng.seed();
  trace.stream_id = rng.stream_id();
  trace.thin = std::max<std::size_t>(1, options.thin);
  if (options.record) {
    const std::size_t kept = static_cast<std::size_t>((n_steps + trace.thin - 1) / trace.thin);
    trace.observable.reserve(kept);
    trace.macro_flags.reserve(kept);
    trace.micro_flags.reserve(kept);
  }

  MicroState x = std::move(x0);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t i = 0;
  try {
    for (; i < n_steps; ++i) {
      const StepOutcome s = kernel.step(x, rng);
      trace.macro_proposed += s.macro_proposed;
      trace.macro_accepted += s.macro_accepted;
      trace.micro_proposed += s.micro_proposed;
      trace.micro_accepted += s.micro_accepted;
      trace.nonfinite += s.nonfinite;
      if (!std::isnan(s.micro_alpha)) {
        trace.min_micro_alpha = std::min(trace.min_micro_alpha, s.micro_alpha);
        trace.max_micro_alpha_deviation =
            std::max(trace.max_micro_alpha_deviation, std::abs(s.micro_alpha - 1.0));
      }
      const double value = observable(x);
      trace.observable_sum += value;
      if (options.record && i % trace.thin == 0) {
        trace.observable.push_back(value);
        trace.macro_flags.push_back(s.macro_accepted);
        trace.micro_flags.push_back(s.micro_accepted);
      }
      if (options.on_value) options.on_value(value);
    }
  } catch (const std::exception& e) {
    trace.valid = false;
    trace.error = e.what();
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  trace.n_steps = i;
  return trace;
}

}  // namespace mmmc
