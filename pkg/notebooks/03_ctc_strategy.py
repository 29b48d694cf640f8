"""
Sending a message back through a noisy loop
===========================================

Builds the amplified-teleportation strategy around a depolarizing loop,
closes the loop, and compares the simulated error with the closed form.
"""
import numpy as np

from retrocap import channels as ch
from retrocap import linalg as la
from retrocap import measures as ms
from retrocap import pctc

n = ch.depolarizing(2, 0.5)
i_max = ms.max_information(n).value
i_doe = ms.doeblin_information(n).value

# a noiseless loop is a swap: closing it leaves id / d^2 before renormalization
swap_loop = pctc.loop_supermap(pctc.LoopedMap(ch.swap(2, 2), (2,)))
print("swap loop Choi / identity Choi:", np.allclose(swap_loop.choi, ch.identity(2).choi / 4))

for d_m in (2, 3):
    q = pctc.simulated_quantum_infidelity(pctc.build_strategy(n, d_m, "quantum"), n)
    c = pctc.simulated_classical_error(pctc.build_strategy(n, d_m, "classical"), n)
    print(f"d_M={d_m}  infidelity {q['phi']:.8f} vs {pctc.quantum_infidelity_target(i_max, i_doe, d_m):.8f}"
          f"   error {c['worst']:.8f} vs {pctc.classical_error_target(i_max, i_doe, d_m):.8f}")

# the same protocol looped over the forward memory gives the same state
s = pctc.build_strategy(n, 2, "quantum")
phi = la.max_entangled(2)
back = pctc.renormalized_loop(pctc.strategy_loop(s, n), phi, ref_dim=2)
fwd = pctc.renormalized_loop(pctc.forward_loop(s, n), phi, ref_dim=2)
print("backward and forward pictures agree:", np.max(np.abs(back - fwd)))

# a replacement channel carries nothing: the output ignores the message
r = ch.replacement(la.uniform(2), 2)
print("replacement loop infidelity", pctc.simulated_quantum_infidelity(pctc.build_strategy(r, 2), r)["phi"])
