"""Decompose the key rate of each conditioning scheme at a fixed distance.

The pipeline has three stages: the conditional covariance of the kept
pair, the thermal-loss channel map, and the reverse-reconciliation rate
calculus.  This script prints every intermediate quantity at 100 km so
the trade can be read off directly: conditioning shrinks the mutual
information and charges an acceptance probability, but it shrinks the
eavesdropper's Holevo information faster.
"""

import math

from psqkd import (
    ChannelSpec,
    SourceSpec,
    apply_channel,
    covariance_subtracted,
    pipeline_key_rate,
    scheme_label,
)

V = 20.0
DIST_KM = 100.0
BETA = 0.95

channel = ChannelSpec(distance_km=DIST_KM, loss_db_per_km=0.2, epsilon=0.01)
sources = [
    SourceSpec.tmsv(V),
    SourceSpec.k_photon(V, 0.8, 1),
    SourceSpec.k_photon(V, 0.8, 2),
    SourceSpec.on_off(V, 0.8),
]

print(f"V = {V:g}, distance = {DIST_KM:g} km "
      f"(channel transmittance {channel.t_c:.4f}), beta = {BETA:g}\n")
head = (f"{'scheme':<8} {'P(accept)':>10} {'v1':>8} {'v2':>8} {'phi':>8} "
        f"{'I_AB':>9} {'holevo':>9} {'key rate':>11}")
print(head)
print("-" * len(head))
for src in sources:
    rep = covariance_subtracted(src)
    post = apply_channel(rep.cov, channel)
    kr = pipeline_key_rate(src, channel, BETA)
    print(f"{scheme_label(src):<8} {rep.success_prob:>10.5f} "
          f"{post.v1:>8.4f} {post.v2:>8.4f} {post.phi:>8.4f} "
          f"{kr.mutual_info:>9.5f} {kr.holevo:>9.5f} {kr.key_rate:>11.3e}")

print("\nThe single-click scheme keeps a positive rate here because its")
print("conditional state looks like a weaker source seen through extra")
print("loss: same correlations, less excess noise leverage for Eve.")
src = SourceSpec.k_photon(V, 0.8, 1)
rep = covariance_subtracted(src)
print(f"equivalent pure-source parameters: V_eq = {rep.v_a:.4f}, "
      f"loss eta_eq = {rep.eta_a:.4f}")
print(f"acceptance-weighted rate per emitted symbol at 20 dB channel loss: "
      f"{pipeline_key_rate(src, channel, BETA).key_rate:.3e} bits")
