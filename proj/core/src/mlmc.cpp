#include "markovopt/mlmc.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "markovopt/error.hpp"

namespace markovopt {

namespace {

constexpr std::uint64_t kChunk = 1024;

std::uint64_t saturating_block(int level, std::uint64_t base) {
  if (level >= 64) return std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t scale = std::uint64_t{1} << level;
  if (base > std::numeric_limits<std::uint64_t>::max() / scale) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return scale * base;
}

void draw_states(ChainSampler& sampler, std::uint64_t count,
                 std::vector<StateIndex>& out) {
  out.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = sampler.sample_next();
}

struct Neumaier {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

void EstimatorConfig::validate() const {
  if (B < 1) throw ParameterError("estimator: B must be >= 1");
  if (!(M >= 2.0) || !std::isfinite(M)) {
    throw ParameterError("estimator: M must be a finite real >= 2");
  }
}

int EstimatorConfig::max_level() const {
  int m = 0;
  while (m < 62 && std::ldexp(1.0, m + 1) <= M) ++m;
  return m;
}

int sample_level(Rng& rng) {
  std::uint64_t u = rng.next_u64();
  // All-zero word: extend with another draw (probability 2^-64).
  int level = 1;
  while (u == 0) {
    level += 64;
    u = rng.next_u64();
  }
  return level + std::countr_zero(u);
}

Vector combine_levels(const Vector& g0, const Vector& g_previous,
                      const Vector& g_level, int level, bool truncated) {
  if (truncated) return g0;
  return g0 + std::ldexp(1.0, level) * (g_level - g_previous);
}

GradientEstimate mlmc_gradient_at_level(const NoisyOracle& oracle,
                                        ChainSampler& sampler, const Vector& x,
                                        const EstimatorConfig& cfg, int level) {
  cfg.validate();
  if (level < 1) throw ParameterError("estimator: level must be >= 1");
  const auto d = static_cast<Eigen::Index>(oracle.dimension());
  GradientEstimate est;
  est.level = level;
  est.truncated = level > cfg.max_level();
  est.chain_advance = saturating_block(level, cfg.B);

  std::vector<StateIndex> states;
  Vector g0 = Vector::Zero(d);
  draw_states(sampler, cfg.B, states);
  oracle.accumulate(x, states.data(), states.size(), g0);
  est.oracle_calls = cfg.B;

  if (est.truncated) {
    if (cfg.charge_truncated_levels) {
      // Evaluate the rest of the block in bounded chunks.
      std::uint64_t left = est.chain_advance - cfg.B;
      Vector scratch = Vector::Zero(d);
      while (left > 0) {
        const std::uint64_t n = std::min<std::uint64_t>(left, 1u << 16);
        draw_states(sampler, n, states);
        oracle.accumulate(x, states.data(), states.size(), scratch);
        est.oracle_calls += n;
        left -= n;
      }
    } else {
      sampler.advance(est.chain_advance - cfg.B);
    }
    est.vector = g0 / static_cast<double>(cfg.B);
    return est;
  }

  // Shared prefix: g_{J-1} is the mean of the first 2^{J-1} B states and
  // g_J of all 2^J B.
  const std::uint64_t half = est.chain_advance / 2;
  Vector prefix = g0;
  if (half > cfg.B) {
    draw_states(sampler, half - cfg.B, states);
    oracle.accumulate(x, states.data(), states.size(), prefix);
  }
  Vector full = prefix;
  draw_states(sampler, est.chain_advance - half, states);
  oracle.accumulate(x, states.data(), states.size(), full);
  est.oracle_calls = est.chain_advance;

  est.vector = combine_levels(g0 / static_cast<double>(cfg.B),
                              prefix / static_cast<double>(half),
                              full / static_cast<double>(est.chain_advance),
                              level, false);
  return est;
}

GradientEstimate mlmc_gradient(const NoisyOracle& oracle, ChainSampler& sampler,
                               const Vector& x, const EstimatorConfig& cfg,
                               Rng& rng) {
  return mlmc_gradient_at_level(oracle, sampler, x, cfg, sample_level(rng));
}

BatchMean batch_mean(const NoisyOracle& oracle, ChainSampler& sampler,
                     const Vector& x, std::uint64_t n) {
  if (n < 1) throw ParameterError("batch_mean: n must be >= 1");
  std::vector<StateIndex> states;
  draw_states(sampler, n, states);
  BatchMean out;
  out.vector = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  oracle.accumulate(x, states.data(), states.size(), out.vector);
  out.vector /= static_cast<double>(n);
  out.oracle_calls = n;
  return out;
}

double expected_cost(const EstimatorConfig& cfg) {
  cfg.validate();
  const int m = cfg.max_level();
  return static_cast<double>(cfg.B) * (m + std::ldexp(1.0, -m));
}

namespace {

struct ChunkSums {
  Vector sum;         // sum of estimates (or control-corrected estimates)
  Vector sum_sq;      // coordinate-wise sum of squares of the same
  double err_sq = 0;  // sum ||g - target||^2
  double err_sq_sq = 0;
};

ChunkSums run_chunk(const NoisyOracle& oracle,
                    const std::shared_ptr<const FiniteMarkovKernel>& kernel,
                    const Vector& x, const Vector& target,
                    const EstimatorConfig& cfg, const BiasVarianceOptions& opt,
                    std::uint64_t chunk, std::uint64_t count) {
  const auto d = x.size();
  ChunkSums s{Vector::Zero(d), Vector::Zero(d), 0.0, 0.0};
  const Vector& pi = oracle.stationary();
  for (std::uint64_t t = 0; t < count; ++t) {
    Rng rng = Rng::stream(opt.seed, chunk * kChunk + t);
    const std::uint64_t chain_seed = rng.next_u64();
    const int level = sample_level(rng);
    auto draw_stationary = [&]() {
      const double u = rng.uniform();
      double c = 0.0;
      for (Eigen::Index i = 0; i < pi.size(); ++i) {
        c += pi(i);
        if (u < c) return static_cast<StateIndex>(i);
      }
      return static_cast<StateIndex>(pi.size() - 1);
    };
    const StateIndex start =
        opt.initial_state ? *opt.initial_state : draw_stationary();
    ChainSampler sampler(kernel, chain_seed, start);
    const Vector g = mlmc_gradient_at_level(oracle, sampler, x, cfg, level).vector;
    const double err = (g - target).squaredNorm();
    s.err_sq += err;
    s.err_sq_sq += err * err;

    Vector v = g;
    if (opt.coupled_control) {
      ChainSampler twin(kernel, chain_seed, draw_stationary());
      v = g - mlmc_gradient_at_level(oracle, twin, x, cfg, level).vector + target;
    }
    s.sum += v;
    s.sum_sq.array() += v.array().square();
  }
  return s;
}

}  // namespace

BiasVariance measure_bias_variance(
    const NoisyOracle& oracle, std::shared_ptr<const FiniteMarkovKernel> kernel,
    const Vector& x, const EstimatorConfig& cfg,
    const BiasVarianceOptions& options) {
  cfg.validate();
  if (!kernel) throw ParameterError("measure_bias_variance: null kernel");
  if (kernel->state_count() != oracle.state_count()) {
    throw ParameterError("measure_bias_variance: kernel/oracle state mismatch");
  }
  if (options.trials < 2) {
    throw ParameterError("measure_bias_variance: need at least 2 trials");
  }
  const Vector target = oracle.mean_field(x);
  const std::uint64_t chunks = (options.trials + kChunk - 1) / kChunk;
  std::vector<ChunkSums> results(chunks);

  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
      const std::uint64_t count =
          std::min(kChunk, options.trials - c * kChunk);
      results[c] = run_chunk(oracle, kernel, x, target, cfg, options, c, count);
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const auto d = x.size();
  std::vector<Neumaier> sum(static_cast<std::size_t>(d));
  std::vector<Neumaier> sum_sq(static_cast<std::size_t>(d));
  Neumaier err, err_sq;
  for (const auto& r : results) {
    for (Eigen::Index i = 0; i < d; ++i) {
      sum[static_cast<std::size_t>(i)].add(r.sum(i));
      sum_sq[static_cast<std::size_t>(i)].add(r.sum_sq(i));
    }
    err.add(r.err_sq);
    err_sq.add(r.err_sq_sq);
  }

  const double n = static_cast<double>(options.trials);
  BiasVariance out;
  out.trials = options.trials;
  out.mean.resize(d);
  double trace_cov_of_mean = 0.0;
  double bias_sq_raw = 0.0;
  double var_of_bias = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double mean = sum[static_cast<std::size_t>(i)].value() / n;
    const double var = std::max(
        0.0, (sum_sq[static_cast<std::size_t>(i)].value() - n * mean * mean) /
                 (n - 1.0));
    out.mean(i) = mean;
    const double b = mean - target(i);
    bias_sq_raw += b * b;
    trace_cov_of_mean += var / n;
    // Delta method: Var(b^2) ~ 4 b^2 Var(mean) + 2 Var(mean)^2.
    var_of_bias += 4.0 * b * b * var / n + 2.0 * (var / n) * (var / n);
  }
  out.bias_sq = bias_sq_raw - trace_cov_of_mean;
  out.bias_sq_se = std::sqrt(var_of_bias);
  out.variance = err.value() / n;
  const double var_err =
      std::max(0.0, (err_sq.value() - n * out.variance * out.variance) / (n - 1.0));
  out.variance_se = std::sqrt(var_err / n);
  return out;
}

}  // namespace markovopt
