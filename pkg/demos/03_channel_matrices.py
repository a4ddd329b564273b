"""The conditional-probability matrices of receiver and interceptor.

Columns are "symbol sent", rows "symbol registered"; the dual-basis
matrices are 2m x 2m and block diagonal because sifting removes basis
mismatches.  The attack mixture shows how interception degrades the
legitimate channel.
"""

import numpy as np

from tfqkd import (
    ProtocolParams,
    attack_matrix,
    capacity,
    eve_matrix,
    mixed_bob_matrix,
    p_correct,
    p_second_correct,
    p_wrong,
)

np.set_printoptions(precision=4, suppress=True)
params = ProtocolParams(m=4, alpha=0.5, beta=0.7, epsilon=0.5)

print("matched-basis receiver (spill only):")
print(p_correct(params))

print("\nwrong-basis interception (centered conjugate pulse, no symbol info):")
print(p_wrong(params))

print("\nsecond-stage interception (after wrong-basis truncation):")
print(p_second_correct(params))

print("\ninterceptor's post-sifting channel, column sums:")
print(eve_matrix(params).sum(axis=0))

print("\nreceiver channel on intercepted photons, column sums:")
print(attack_matrix(params).sum(axis=0))

mixed = mixed_bob_matrix(params)
print(f"\nattack-averaged receiver at epsilon={params.epsilon}: trace={np.trace(mixed):.4f}")

rep = capacity(params)
print(
    f"\ninformation balance: I_AB={rep.i_ab:.4f}  I_AE={rep.i_ae:.4f}  "
    f"C={rep.capacity:.4f} bits/photon  QSER={rep.qser:.4f}"
)
print("the interceptor's second filter keeps part of the symbol information,")
print("which is why the two bases are not perfectly complementary here.")
