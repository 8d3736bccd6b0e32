"""
Rates, the cascaded channel and the quadratic-transform bound
=============================================================

The RIS adds a cascaded term to every direct channel.  The optimiser works
on a surrogate of the SINR which is a lower bound everywhere and tight at
the MMSE auxiliary vector.
"""

import numpy as np

from risbackhaul import ScenarioConfig, build_scenario
from risbackhaul.model import (achievable_rates, cascade_coefficients, effective_channel,
                               surrogate_value)
from risbackhaul.numerics import make_rng, sample_cn
from risbackhaul.optimizer import update_auxiliary
from risbackhaul.validation import sinr

sc = build_scenario(ScenarioConfig().with_system(M=64), seed=2)
rng = make_rng(0)
sel = (0, 1)
W = np.zeros((sc.L, sc.N), dtype=complex)
W[0], W[1] = sample_cn(rng, sc.N), sample_cn(rng, sc.N)
W *= np.sqrt(sc.params.P_max) / np.linalg.norm(W)
phi = np.exp(2j * np.pi * rng.random(sc.M))

# rates in Gbps for the two selected survivors
print('rates:', achievable_rates(sc, phi, W, sel)[:2] / 1e9)

# y^H H_eff w splits into a direct part and a part linear in the phases
y = sample_cn(rng, sc.N)
a, b = cascade_coefficients(sc, 0, y, W[0])
print('cascade split error:', abs(a + np.vdot(b, phi) - np.vdot(y, effective_channel(sc, 0, phi) @ W[0])))

# tight at the MMSE auxiliary, below the SINR elsewhere
yy = update_auxiliary(sc, phi, W, sel, eps_reg=0.0).y[0]
print('SINR', sinr(sc, 0, phi, W, sel), ' surrogate', surrogate_value(sc, 0, yy, phi, W, sel))
print('perturbed surrogate', surrogate_value(sc, 0, 1.1 * yy, phi, W, sel))
