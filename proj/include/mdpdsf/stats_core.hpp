#pragma once

#include <cstdint>
#include <limits>

namespace mdpdsf {

/// Counter-based random stream. A (seed, stream_id) pair fully determines the
/// sequence; the counter is the only mutable state, so copies fork cheaply.
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double standard_normal();

  /// Independent stream keyed on (seed, stream_id + offset).
  RngStream fork(std::uint64_t offset) const { return RngStream(seed_, stream_id_ + offset); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

double std_normal_pdf(double x);
double log_std_normal_pdf(double x);
double std_normal_cdf(double x);

/// log Phi(x), finite for every finite x.
double log_std_normal_cdf(double x);

/// phi(x) / Phi(x), evaluated without forming Phi(x) in a denominator when it
/// is small.
double mills_ratio(double x);

double sample_half_normal(double sigma_u, RngStream& rng);

/// N(mu, sigma^2) conditioned on the draw being >= 0.
double sample_truncated_normal(double mu, double sigma, RngStream& rng);

double sample_exponential(double mean, RngStream& rng);

}  // namespace mdpdsf
