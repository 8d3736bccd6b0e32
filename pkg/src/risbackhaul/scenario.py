"""Network realisation: hexagonal topology, channels and local traffic.

A :class:`Scenario` bundles everything the optimiser needs for one Monte
Carlo instance.  Randomness is split into independent sub-streams of the
scenario seed (direct channels, RIS channels, traffic) so that two scenarios
differing only in the RIS size share their direct channels and traffic draws.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .errors import InvalidInput
from .numerics import make_rng, sample_cn

__all__ = ['SPEED_OF_LIGHT', 'SystemParams', 'ScenarioConfig', 'Topology',
           'ChannelSet', 'TrafficProfile', 'Scenario', 'build_topology',
           'pathloss_db', 'pathloss_gain', 'build_channels',
           'traffic_profile', 'build_scenario']

SPEED_OF_LIGHT = 3e8

# sub-stream keys of a scenario seed
_STREAM_TOPOLOGY, _STREAM_DIRECT, _STREAM_RIS, _STREAM_TRAFFIC = 0, 1, 2, 3
_MAX_RINGS = 3


@dataclass(frozen=True)
class SystemParams:
    """Physical and algorithmic constants of the system (SI units).

    Defaults reproduce the reference parameter table: ``N=4``, ``M=512``,
    ``L=7``, 5 W, 1 GHz at 28 GHz, noise 1e-12 W, 1 Gbps BBU capacity, 100 m
    inter-site distance and a 9 dB Rician factor.
    """
    N: int = 4
    M: int = 512
    L: int = 7
    P_max: float = 5.0
    B: float = 1e9
    f_c: float = 28e9
    sigma2: float = 1e-12
    C_0: float = 1e9
    d_0: float = 100.0
    kappa: float = 10 ** (9 / 10)
    big_M: float = 1e10
    eps_reg: float | None = None
    E: int = 50

    def __post_init__(self):
        for name in ('N', 'L', 'E'):
            if int(getattr(self, name)) < 1:
                raise InvalidInput(f'{name} must be >= 1')
        if self.M < 0:
            raise InvalidInput('M must be >= 0')
        for name in ('P_max', 'B', 'f_c', 'sigma2', 'C_0', 'd_0', 'kappa'):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise InvalidInput(f'{name} must be positive and finite, got {val}')
        if self.big_M < self.C_0:
            raise InvalidInput('big_M must be at least C_0')
        if self.eps_reg is not None and self.eps_reg < 0:
            raise InvalidInput('eps_reg must be >= 0')

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.f_c

    @property
    def regularization(self):
        """Auxiliary-update regulariser, ``1e-6/sqrt(N)`` unless overridden."""
        if self.eps_reg is not None:
            return self.eps_reg
        return 1e-6 / math.sqrt(self.N)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build a :class:`Scenario` except the seed."""
    system: SystemParams = field(default_factory=SystemParams)
    n_los: float = 2.0
    n_nlos: float = 3.19
    ris_offset_fraction: float = 0.25
    eta: float = 0.5
    alpha: float = 0.0
    gamma: float = 2.0
    sigma_chi: float = 0.0

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise InvalidInput(f'eta must lie in [0, 1], got {self.eta}')
        if not 0 <= self.alpha <= 1:
            raise InvalidInput(f'alpha must lie in [0, 1], got {self.alpha}')
        if not (self.gamma > 0 and self.sigma_chi >= 0):
            raise InvalidInput('gamma must be positive and sigma_chi non-negative')
        if not (self.n_los > 0 and self.n_nlos > 0 and self.ris_offset_fraction > 0):
            raise InvalidInput('path-loss exponents and RIS offset must be positive')

    def with_system(self, **changes):
        return replace(self, system=replace(self.system, **changes))


@dataclass(frozen=True)
class Topology:
    """2-D positions (metres) of the disconnected BS, survivors and RIS."""
    bs_position: np.ndarray
    survivor_positions: np.ndarray
    ris_position: np.ndarray

    @property
    def d(self):
        """Distances disconnected BS to each surviving BS."""
        return np.linalg.norm(self.survivor_positions - self.bs_position, axis=1)

    @property
    def D(self):
        """Distances RIS to each surviving BS."""
        return np.linalg.norm(self.survivor_positions - self.ris_position, axis=1)

    @property
    def d_ris(self):
        return float(np.linalg.norm(self.ris_position - self.bs_position))

    @property
    def d_min(self):
        return float(self.d.min())

    @property
    def d_max(self):
        return float(self.d.max())


@dataclass(frozen=True)
class ChannelSet:
    """Stacked channel matrices.

    ``H`` is ``(L, N, N)`` (disconnected BS to survivor ``l``), ``G`` is
    ``(L, N, M)`` (RIS to survivor ``l``) and ``G_tilde`` is ``(M, N)``
    (disconnected BS to RIS).
    """
    H: np.ndarray
    G: np.ndarray
    G_tilde: np.ndarray


@dataclass(frozen=True)
class TrafficProfile:
    eta: float
    eta_l: np.ndarray
    C_d: float
    C_l: np.ndarray
    spare: np.ndarray
    alpha: float
    gamma: float
    sigma_chi: float


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    topology: Topology
    channels: ChannelSet
    traffic: TrafficProfile
    seed: int | None = None

    def __post_init__(self):
        p, ch = self.params, self.channels
        if ch.H.shape != (p.L, p.N, p.N):
            raise InvalidInput(f'H has shape {ch.H.shape}, expected {(p.L, p.N, p.N)}')
        if ch.G.shape != (p.L, p.N, p.M) or ch.G_tilde.shape != (p.M, p.N):
            raise InvalidInput('RIS channel dimensions do not match M and N')
        if self.traffic.spare.shape != (p.L,):
            raise InvalidInput('traffic profile does not match L')
        for arr in (ch.H, ch.G, ch.G_tilde, self.traffic.eta_l, self.traffic.C_l,
                    self.traffic.spare, self.topology.survivor_positions):
            arr.setflags(write=False)

    N = property(lambda self: self.params.N)
    M = property(lambda self: self.params.M)
    L = property(lambda self: self.params.L)

    def with_channels(self, **changes):
        """Copy with some channel arrays replaced (handy for tests)."""
        return replace(self, channels=replace(self.channels, **changes))

    def with_traffic(self, **changes):
        return replace(self, traffic=replace(self.traffic, **changes))


def _hex_sites(d_0, rings):
    sites = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            if max(abs(q), abs(r), abs(q + r)) == 0 or max(abs(q), abs(r), abs(q + r)) > rings:
                continue
            sites.append((d_0 * (q + r / 2), d_0 * r * math.sqrt(3) / 2))
    sites = np.array(sites)

    def key(xy):
        ang = math.atan2(xy[1], xy[0]) % (2 * math.pi)
        if ang > 2 * math.pi - 1e-9:
            ang = 0.0
        return round(math.hypot(*xy) / d_0, 9), round(ang, 9)

    return np.array(sorted(sites, key=key))


def build_topology(params, rng=None, ris_offset_fraction=0.25):
    """Place the disconnected BS at the origin and survivors on a hex lattice.

    Survivors take the ``L`` lattice sites nearest the origin, ties broken
    counter-clockwise from the +x axis.  The RIS sits ``ris_offset_fraction *
    d_0`` along +x.  ``rng`` is accepted for interface symmetry; placement is
    deterministic.
    """
    sites = _hex_sites(params.d_0, _MAX_RINGS)
    if params.L > len(sites):
        raise InvalidInput(f'L={params.L} exceeds the {len(sites)} lattice '
                           f'sites within {_MAX_RINGS} rings')
    if ris_offset_fraction <= 0:
        raise InvalidInput('ris_offset_fraction must be positive')
    return Topology(bs_position=np.zeros(2),
                    survivor_positions=sites[:params.L].copy(),
                    ris_position=np.array([ris_offset_fraction * params.d_0, 0.0]))


def pathloss_db(f_c, d, link_type='NLOS', n_los=2.0, n_nlos=3.19):
    """Close-in free-space-reference path loss in dB.

    ``PL = 20 log10(4 pi f_c / c) + 10 n log10(d)`` with ``d`` in metres.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d < 1.0):
        raise InvalidInput('path loss model requires d >= 1 m')
    if link_type == 'LOS':
        n = n_los
    elif link_type == 'NLOS':
        n = n_nlos
    else:
        raise InvalidInput(f"link_type must be 'LOS' or 'NLOS', got {link_type!r}")
    fspl = 20 * np.log10(4 * np.pi * f_c / SPEED_OF_LIGHT)
    pl = fspl + 10 * n * np.log10(d)
    return float(pl) if pl.ndim == 0 else pl


def pathloss_gain(f_c, d, link_type='NLOS', n_los=2.0, n_nlos=3.19):
    return 10 ** (-np.asarray(pathloss_db(f_c, d, link_type, n_los, n_nlos)) / 10)


def _ula(n, theta):
    # half-wavelength uniform linear array along the y axis
    return np.exp(1j * np.pi * np.arange(n) * np.sin(theta))


def _upa(m, theta):
    # planar RIS in the vertical plane; in-plane geometry only excites the
    # horizontal index
    if m == 0:
        return np.zeros(0, dtype=complex)
    rows = max(k for k in range(1, int(math.isqrt(m)) + 1) if m % k == 0)
    cols = m // rows
    horiz = np.exp(1j * np.pi * np.arange(cols) * np.sin(theta))
    return np.tile(horiz, rows)


def _angle(src, dst):
    v = np.asarray(dst) - np.asarray(src)
    return math.atan2(v[1], v[0])


def _rician(rng, los, kappa):
    nlos = sample_cn(rng, *los.shape)
    return math.sqrt(kappa / (1 + kappa)) * los + math.sqrt(1 / (1 + kappa)) * nlos


def build_channels(params, topology, rng, n_los=2.0, n_nlos=3.19, ris_rng=None):
    """Draw direct NLOS Rayleigh channels and Rician RIS channels.

    Direct channels are drawn first, so they do not depend on ``M``.  RIS
    channels come from ``ris_rng`` when given, otherwise from ``rng``.
    """
    ris_rng = rng if ris_rng is None else ris_rng
    N, M, L = params.N, params.M, params.L
    lam = params.wavelength
    beta_direct = pathloss_gain(params.f_c, topology.d, 'NLOS', n_los, n_nlos)
    H = np.stack([math.sqrt(beta_direct[l]) * sample_cn(rng, N, N) for l in range(L)])

    bs, ris = topology.bs_position, topology.ris_position
    d_ris = topology.d_ris
    los_gt = (np.outer(_upa(M, _angle(ris, bs)), _ula(N, _angle(bs, ris)).conj())
              * np.exp(-2j * np.pi * d_ris / lam))
    G_tilde = (math.sqrt(pathloss_gain(params.f_c, d_ris, 'LOS', n_los, n_nlos))
               * _rician(ris_rng, los_gt, params.kappa))

    G = np.empty((L, N, M), dtype=complex)
    for l, (pos, D_l) in enumerate(zip(topology.survivor_positions, topology.D)):
        los = (np.outer(_ula(N, _angle(pos, ris)), _upa(M, _angle(ris, pos)).conj())
               * np.exp(-2j * np.pi * D_l / lam))
        G[l] = (math.sqrt(pathloss_gain(params.f_c, D_l, 'LOS', n_los, n_nlos))
                * _rician(ris_rng, los, params.kappa))
    return ChannelSet(H=H, G=G, G_tilde=G_tilde.astype(complex))


def traffic_profile(params, topology, eta, alpha=0.0, gamma=2.0, sigma_chi=0.0,
                    rng=None):
    """Local load of each survivor for a given disconnected-BS intensity.

    Survivors closer to the disconnected BS are loaded more heavily when
    ``alpha > 0``.  Loads are clamped to ``[0, 1]`` so spare capacity is never
    negative.  When all survivors are equidistant the distance factor is 1.
    """
    if not 0 <= eta <= 1:
        raise InvalidInput(f'eta must lie in [0, 1], got {eta}')
    if not 0 <= alpha <= 1:
        raise InvalidInput(f'alpha must lie in [0, 1], got {alpha}')
    if not gamma > 0:
        raise InvalidInput(f'gamma must be positive, got {gamma}')
    if not sigma_chi >= 0:
        raise InvalidInput(f'sigma_chi must be >= 0, got {sigma_chi}')

    d = topology.d
    spread = topology.d_max - topology.d_min
    if spread > 0:
        factor = (topology.d_max - d) / spread
    else:
        factor = np.ones_like(d)
    chi = np.zeros(params.L)
    if sigma_chi > 0:
        if rng is None:
            raise InvalidInput('sigma_chi > 0 requires an rng')
        chi = sigma_chi * rng.standard_normal(params.L)
    eta_l = alpha * factor ** gamma * eta + (1 - alpha) * eta + chi
    eta_l = np.clip(eta_l, 0.0, 1.0)
    C_l = eta_l * params.C_0
    return TrafficProfile(eta=float(eta), eta_l=eta_l, C_d=eta * params.C_0,
                          C_l=C_l, spare=params.C_0 - C_l, alpha=float(alpha),
                          gamma=float(gamma), sigma_chi=float(sigma_chi))


def build_scenario(config=None, seed=0):
    """Build a complete, immutable :class:`Scenario` from a config and seed."""
    config = ScenarioConfig() if config is None else config
    p = config.system
    topo = build_topology(p, make_rng(seed, _STREAM_TOPOLOGY), config.ris_offset_fraction)
    # RIS draws live on their own stream so M does not perturb H
    channels = build_channels(p, topo, make_rng(seed, _STREAM_DIRECT), config.n_los,
                              config.n_nlos, ris_rng=make_rng(seed, _STREAM_RIS))
    traffic = traffic_profile(p, topo, config.eta, config.alpha, config.gamma,
                              config.sigma_chi, make_rng(seed, _STREAM_TRAFFIC))
    return Scenario(params=p, topology=topo, channels=channels, traffic=traffic,
                    seed=seed)

