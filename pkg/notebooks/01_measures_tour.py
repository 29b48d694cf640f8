"""
Information measures of a few qubit channels
============================================

Choi states, max-information, Doeblin information and the singlet-fraction
extremes that tie them together.
"""
import math

import numpy as np

from retrocap import channels as ch
from retrocap import linalg as la
from retrocap import measures as ms

np.set_printoptions(precision=4, suppress=True)

# the Choi state of the half-depolarizing qubit channel
n = ch.depolarizing(2, 0.5)
print(n.choi.real)
print("spectrum", la.eigvalsh(n.choi))

# I_max dominates the Choi state by pi (x) sigma, I_doe sits pi (x) tau under it
for label, m in [("depolarizing 0.5", n), ("erasure 0.5", ch.erasure(2, 0.5)),
                 ("amplitude damping 0.5", ch.amplitude_damping(0.5)), ("identity", ch.identity(2))]:
    i_max = ms.max_information(m).value
    i_doe = ms.doeblin_information(m).value
    i_pm = ms.pm_information(m).value
    print(f"{label:<24} I_max={i_max:.5f}  I_doe={i_doe:.5f}  I_pm={i_pm:.5f}")

# singlet fractions recover both measures: f_max = 2^I_max / d^2, f_min = 2^-I_doe / d^2
ext = ms.singlet_fraction_extremes(n)
print("f_max", ext.f_max, "->", 2 + math.log2(ext.f_max))
print("f_min", ext.f_min, "->", -2 - math.log2(ext.f_min))

# the recovery map attaining f_min is a channel B -> A
k1 = ch.from_choi(ext.k1_choi, 2, 2)
print("K1 is a channel:", k1.is_cp and k1.is_tp)
