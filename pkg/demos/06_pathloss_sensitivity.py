"""
How much the RIS helps depends on the NLOS exponent
===================================================

With the reference NLOS exponent the direct links are strong enough that
even a heavily loaded hotspot is fully recovered without the RIS.  Raising
the exponent weakens the direct links and the RIS uplift appears.
"""

from dataclasses import replace

import numpy as np

from risbackhaul import ScenarioConfig, SolverConfig
from risbackhaul.harness import run_trial, trial_seed

base = ScenarioConfig(eta=0.8, alpha=0.7, gamma=2.0, sigma_chi=0.05).with_system(M=128)
solver = SolverConfig(E=20)

for n_nlos in (3.19, 3.6, 4.0, 4.4):
    psi = {}
    for M in (0, 128):
        cfg = replace(base, n_nlos=n_nlos).with_system(M=M)
        psi[M] = np.mean([run_trial(cfg, solver, trial_seed(0, 'nlos', t))[1].psi
                          for t in range(4)])
    print(f'n_NLOS={n_nlos:4.2f}   psi off {psi[0]:.3f}   psi on {psi[128]:.3f}')
