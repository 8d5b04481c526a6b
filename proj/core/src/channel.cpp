#include "vmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vmimo/errors.hpp"

namespace vmimo {

double mean_link_snr(double distance_m, const LinkParams& params) {
  if (params.path_loss_exponent < 2.0)
    throw ConfigError("path_loss_exponent must be >= 2");
  if (!(distance_m >= 0.0))
    throw std::invalid_argument("mean_link_snr: negative distance");
  const double d = std::max(distance_m, 1.0);
  const double reference = std::pow(10.0, params.reference_snr_db / 10.0);
  return reference * std::pow(d, -params.path_loss_exponent);
}

double sample_link_snr(double distance_m, const LinkParams& params,
                       RngStream& rng) {
  const double mean = mean_link_snr(distance_m, params);
  if (!params.rayleigh_fading) return mean;
  return mean * rng.exponential();
}

double af_equivalent_snr(double snr1, double snr2) {
  if (snr1 < 0.0 || snr2 < 0.0)
    throw std::invalid_argument("af_equivalent_snr: negative SNR");
  return snr1 * snr2 / (snr1 + snr2 + 1.0);
}

double ber_theoretical(double snr) {
  if (snr < 0.0) throw std::invalid_argument("ber_theoretical: negative SNR");
  // Q(sqrt(2*snr)) = erfc(sqrt(snr)) / 2
  return 0.5 * std::erfc(std::sqrt(snr));
}

double probe_ber(double snr_e2e, long seq_len, RngStream& rng) {
  if (seq_len < 1000)
    throw ConfigError("probe_ber: sequence length must be >= 1000 bits");
  if (snr_e2e < 0.0) throw std::invalid_argument("probe_ber: negative SNR");
  if (std::isinf(snr_e2e)) return 0.0;

  // Unit-energy symbols, noise sigma matching BER = Q(sqrt(2*snr)).
  const double sigma =
      snr_e2e > 0.0 ? 1.0 / std::sqrt(2.0 * snr_e2e)
                    : std::numeric_limits<double>::infinity();
  long errors = 0;
  for (long i = 0; i < seq_len; ++i) {
    const double symbol = rng.bernoulli(0.5) ? 1.0 : -1.0;
    double received;
    if (std::isinf(sigma)) {
      received = rng.normal();  // pure noise, symbol drowned
    } else {
      received = symbol + sigma * rng.normal();
    }
    const double decoded = received >= 0.0 ? 1.0 : -1.0;
    if (decoded != symbol) ++errors;
  }
  const double rate = static_cast<double>(errors) / seq_len;
  return std::min(rate, 0.5);
}

std::vector<int> rank_relays(std::span<const PathQuality> paths, int max_relays,
                             double ber_threshold) {
  if (max_relays < 0)
    throw std::invalid_argument("rank_relays: max_relays must be >= 0");
  std::vector<const PathQuality*> eligible;
  for (const auto& p : paths)
    if (p.ber <= ber_threshold) eligible.push_back(&p);
  std::sort(eligible.begin(), eligible.end(),
            [](const PathQuality* a, const PathQuality* b) {
              if (a->ber != b->ber) return a->ber < b->ber;
              return a->relay_id < b->relay_id;
            });
  if (static_cast<int>(eligible.size()) > max_relays)
    eligible.resize(max_relays);
  std::vector<int> ids;
  ids.reserve(eligible.size());
  for (const auto* p : eligible) ids.push_back(p->relay_id);
  return ids;
}

}  // namespace vmimo
