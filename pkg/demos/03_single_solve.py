"""
Solving one realisation
=======================

Joint choice of receiving survivors, precoders and RIS phases for one
seeded scenario, with and without the RIS, and with the three selection
strategies.
"""

from risbackhaul import ScenarioConfig, SolverConfig, Strategy, build_scenario, run_algorithm
from risbackhaul.numerics import make_rng

cfg = ScenarioConfig(eta=0.8, alpha=0.7, gamma=2.0, sigma_chi=0.05).with_system(M=64)

for M in (64, 0):
    sc = build_scenario(cfg.with_system(M=M), seed=3)
    res = run_algorithm(sc, SolverConfig(), make_rng(3, 7))
    print(f'M={M:3d}  R={res.R / 1e9:.3f} Gbps  psi={res.psi:.3f}  '
          f'selected={[l + 1 for l in res.selection]}  iterations={res.iterations}')

# enumeration over all subsets is the reference; greedy is cheaper
sc = build_scenario(cfg, seed=3)
for strategy in Strategy:
    res = run_algorithm(sc, SolverConfig(strategy=strategy, E=20), make_rng(3, 7))
    print(f'{strategy.value:9s} R={res.R / 1e9:.3f}  time={res.wall_time:.2f} s')
