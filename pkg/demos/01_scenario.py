"""
Building a failure scenario
===========================

One small-cell cluster on a hexagonal grid loses the fibre of its centre
cell.  We look at where the surviving cells sit, how much the links lose to
path loss and how much spare capacity each survivor has left.
"""

import numpy as np

from risbackhaul import ScenarioConfig, build_scenario
from risbackhaul.scenario import pathloss_db

cfg = ScenarioConfig(eta=0.6)
sc = build_scenario(cfg, seed=1)
topo = sc.topology

# survivors are sorted by distance, nearest ring first
print('survivor distances [m]:', np.round(topo.d, 1))
print('RIS position:', topo.ris_position, ' BS-RIS distance:', round(topo.d_ris, 1))
print('RIS-survivor distances [m]:', np.round(topo.D, 1))

# close-in path loss at 28 GHz
for d in (1, 10, 100, 200):
    print(f'{d:4d} m  LOS {pathloss_db(28e9, d, "LOS"):6.2f} dB'
          f'   NLOS {pathloss_db(28e9, d, "NLOS"):6.2f} dB')

# channel shapes: direct links, RIS-to-survivor links, BS-to-RIS link
ch = sc.channels
print('H', ch.H.shape, ' G', ch.G.shape, ' G~', ch.G_tilde.shape)

# uniform traffic: every cell carries eta * C_0
print('local load', sc.traffic.eta_l, ' spare', sc.traffic.spare / 1e9, 'Gbps')

# a hotspot concentrates load near the failed cell
hot = build_scenario(ScenarioConfig(eta=0.6, alpha=0.7, gamma=2.0, sigma_chi=0.05), seed=1)
print('hotspot local load', np.round(hot.traffic.eta_l, 3))
