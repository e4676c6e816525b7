#include "mdpdsf/stats_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mdpdsf/errors.hpp"

namespace mdpdsf {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;

// Below this point log Phi and the Mills ratio switch from erfc to the
// continued fraction for the upper-tail ratio (1 - Phi(t)) / phi(t).
constexpr double kTailSwitch = -5.0;

// (1 - Phi(t)) / phi(t) for t >= 5 by modified Lentz on
// 1 / (t + 1/(t + 2/(t + 3/(t + ...)))).
double upper_tail_ratio(double t) {
  constexpr double tiny = 1e-300;
  double f = t;
  double c = t;
  double d = 0.0;
  for (int k = 1; k < 2000; ++k) {
    d = t + k * d;
    if (std::abs(d) < tiny) d = tiny;
    c = t + k / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(mix64(seed) ^ (stream_id * kGolden + 0x632be59bd9b4e019ULL))) {}

RngStream::result_type RngStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  std::normal_distribution<double> dist;
  return dist(*this);
}

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_std_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_std_normal_cdf(double x) {
  if (x >= kTailSwitch) {
    if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  }
  return log_std_normal_pdf(x) + std::log(upper_tail_ratio(-x));
}

double mills_ratio(double x) {
  if (x >= kTailSwitch) return std_normal_pdf(x) / std_normal_cdf(x);
  return 1.0 / upper_tail_ratio(-x);
}

double sample_half_normal(double sigma_u, RngStream& rng) {
  if (!(sigma_u > 0.0)) throw ParameterDomainError("sample_half_normal: sigma_u must be positive");
  return std::abs(rng.standard_normal()) * sigma_u;
}

double sample_truncated_normal(double mu, double sigma, RngStream& rng) {
  if (!(sigma > 0.0)) throw ParameterDomainError("sample_truncated_normal: sigma must be positive");
  const double lower = -mu / sigma;  // truncation point on the standard scale
  if (std_normal_cdf(mu / sigma) >= 0.1) {
    for (;;) {
      const double z = rng.standard_normal();
      if (z >= lower) return mu + sigma * z;
    }
  }
  // Exponential proposal with the optimal rate for a one-sided tail.
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double z = lower - std::log(rng.uniform()) / rate;
    const double accept = std::exp(-0.5 * (z - rate) * (z - rate));
    if (rng.uniform() <= accept) return std::max(0.0, mu + sigma * z);
  }
}

double sample_exponential(double mean, RngStream& rng) {
  if (!(mean > 0.0)) throw ParameterDomainError("sample_exponential: mean must be positive");
  return -mean * std::log(rng.uniform());
}

}  // namespace mdpdsf
