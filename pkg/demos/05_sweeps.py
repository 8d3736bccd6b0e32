"""
Survivability sweeps
====================

Mean survivability against load for both traffic patterns, and against the
antenna count.  RIS-on and RIS-off runs share seeds.  A reduced grid keeps
the run short; the CLI runs the full grid.
"""

import os
import tempfile

from risbackhaul import ScenarioConfig, SolverConfig
from risbackhaul.harness import ExperimentSpec, export, run_antenna_sweep, run_traffic_sweep

spec = ExperimentSpec(scenario=ScenarioConfig().with_system(M=64), solver=SolverConfig(E=20),
                      eta_grid=(0.3, 0.6, 0.9), trials=3)

traffic = run_traffic_sweep(spec)
for r in traffic.rows:
    print(f"eta={r['eta']:.1f} {r['pattern']:8s} ris={r['ris']!s:5s}  "
          f"R={r['mean_R'] / 1e9:.3f}  psi={r['mean_psi']:.3f}")

antennas = run_antenna_sweep(spec)
for r in antennas.rows:
    print(f"N={r['N']} eta={r['eta']:.1f} ris={r['ris']!s:5s}  psi={r['mean_psi']:.3f}")

out = tempfile.mkdtemp()
print(export(traffic, os.path.join(out, 'traffic.csv')))
print(export(antennas, os.path.join(out, 'antennas.json'), 'json'))
