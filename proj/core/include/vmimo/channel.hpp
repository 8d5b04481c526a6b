#pragma once

#include <span>
#include <vector>

#include "vmimo/rng.hpp"

namespace vmimo {

/// Distance power law with unit noise power; BPSK with coherent detection
/// over the two-hop amplify-and-forward path.
struct LinkParams {
  double path_loss_exponent = 3.5;  // >= 2
  double reference_snr_db = 90.0;   // linear SNR at 1 m, in dB
  bool rayleigh_fading = true;      // one block-fading draw per link per round
};

/// Mean linear SNR at the given distance (no fading draw). Distances under
/// one meter clamp to the co-located reference.
double mean_link_snr(double distance_m, const LinkParams& params);

/// Mean SNR scaled by a Rayleigh power coefficient g ~ Exponential(1)
/// (skipped when fading is disabled).
double sample_link_snr(double distance_m, const LinkParams& params,
                       RngStream& rng);

/// Equivalent end-to-end SNR of an amplify-and-forward relay path:
/// snr1*snr2 / (snr1 + snr2 + 1). Never exceeds min(snr1, snr2).
double af_equivalent_snr(double snr1, double snr2);

/// BPSK bit error rate Q(sqrt(2*snr)); strictly decreasing, 0.5 at snr 0.
double ber_theoretical(double snr);

/// Simulates seq_len known BPSK bits through unit-power AWGN at the
/// equivalent SNR and counts sign flips. Estimate clamped to [0, 0.5].
double probe_ber(double snr_e2e, long seq_len, RngStream& rng);

struct PathQuality {
  int relay_id = 0;
  double snr_hop1 = 0.0;    // linear, SU -> relay
  double snr_hop2 = 0.0;    // linear, relay -> eNB
  double snr_e2e = 0.0;     // linear AF equivalent
  double ber = 0.0;         // probe-measured, the ranking basis
  double ber_theory = 0.0;  // closed-form at snr_e2e
};

/// Relays with BER <= ber_threshold, ascending BER (ties to lower id),
/// truncated to max_relays (N-1). May be empty.
std::vector<int> rank_relays(std::span<const PathQuality> paths, int max_relays,
                             double ber_threshold);

}  // namespace vmimo
