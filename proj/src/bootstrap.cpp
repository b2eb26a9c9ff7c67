#include "windcal/bootstrap.hpp"

#include <cmath>
#include <stdexcept>

#include "windcal/normal.hpp"
#include "windcal/scoring.hpp"

namespace windcal {

double BootstrapSettings::block_length_for(std::size_t n) const {
  double m = mean_block_length ? *mean_block_length : std::cbrt(static_cast<double>(n));
  return m < 1.0 ? 1.0 : m;
}

std::vector<std::size_t> stationary_resample(std::size_t n, double mean_block_length, Rng& rng) {
  if (n < 1) throw std::invalid_argument("stationary_resample: n must be >= 1");
  std::vector<std::size_t> idx;
  idx.reserve(n);
  while (idx.size() < n) {
    std::size_t start = rng.uniform_index(n);
    int len = rng.geometric(mean_block_length);
    for (int j = 0; j < len && idx.size() < n; ++j) idx.push_back((start + j) % n);
  }
  return idx;
}

namespace {
double mean_of(std::span<const double> v) {
  KahanSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}
}  // namespace

SkillSummary skill_ci(std::span<const double> score_series, std::span<const double> ref_series,
                      const BootstrapSettings& settings) {
  const std::size_t n = score_series.size();
  if (n != ref_series.size()) throw std::invalid_argument("skill_ci: series length mismatch");
  if (n < 2) throw std::invalid_argument("skill_ci: need series length >= 2");
  if (settings.replicates < 1) throw std::invalid_argument("skill_ci: replicates must be >= 1");

  const double point = skill_score(mean_of(score_series), mean_of(ref_series));
  const double block = settings.block_length_for(n);

  // One rng sub-stream per replicate; both series share the index sequence.
  KahanSum sum, sumsq;
  for (int r = 0; r < settings.replicates; ++r) {
    Rng rng = Rng::substream(settings.seed, 0x626f6f74u /* "boot" */, static_cast<std::uint64_t>(r));
    auto idx = stationary_resample(n, block, rng);
    KahanSum s, ref;
    for (std::size_t i : idx) {
      s.add(score_series[i]);
      ref.add(ref_series[i]);
    }
    double ref_mean = ref.value() / static_cast<double>(n);
    if (!(ref_mean > 0.0)) throw std::domain_error("skill_ci: replicate reference mean not > 0");
    double sk = 1.0 - (s.value() / static_cast<double>(n)) / ref_mean;
    sum.add(sk);
    sumsq.add(sk * sk);
  }
  const double b = static_cast<double>(settings.replicates);
  double var = settings.replicates > 1
                   ? std::max(0.0, (sumsq.value() - sum.value() * sum.value() / b) / (b - 1.0))
                   : 0.0;
  double sd = std::sqrt(var);
  double z = norm_quantile(0.5 * (1.0 + settings.confidence));
  return {point, point - z * sd, point + z * sd};
}

}  // namespace windcal
