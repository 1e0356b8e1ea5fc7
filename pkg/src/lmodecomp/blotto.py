"""Attacker-vs-Defender resource-allocation games.

The two sides split integer units across m battlefields subject to
per-field caps and a budget; the defender's total loss is the sum of
per-field losses Omega^s indexed by the two allocations.  Each Omega^s
is rank-factorized, which turns the payoff matrix into A^T D with
knapsack-generated A (attacker) and D (defender), and the game is solved
through the saddle-point decomposition at a primal dimension of
K = sum_s rank(Omega^s) regardless of how many pure strategies exist.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .oracles import KnapsackOracle, KnapsackSpec
from .saddle import BilinearSpSpec, build_master_example2, solve_sp
from .solvers import SolverConfig

__all__ = [
    "BlottoSpec",
    "BlottoReport",
    "rank_factor",
    "build_blotto",
    "solve_blotto",
    "blotto_from_json",
    "random_rank1_omegas",
]


@dataclass
class BlottoSpec:
    """Game data: per-field caps and unit costs for both sides, budgets,
    and (caps_a[s]+1) x (caps_d[s]+1) loss matrices (rows: attacker)."""

    caps_a: tuple
    caps_d: tuple
    costs_a: tuple
    costs_d: tuple
    budget_a: int
    budget_d: int
    omegas: tuple
    seed: int | None = None  # recorded when the omegas were generated

    def __post_init__(self):
        self.caps_a = tuple(int(c) for c in self.caps_a)
        self.caps_d = tuple(int(c) for c in self.caps_d)
        self.costs_a = tuple(int(c) for c in self.costs_a)
        self.costs_d = tuple(int(c) for c in self.costs_d)
        self.omegas = tuple(np.atleast_2d(np.asarray(o, dtype=float)) for o in self.omegas)
        m = self.m
        for name in ("caps_a", "caps_d", "costs_a", "costs_d"):
            if len(getattr(self, name)) != m:
                raise ValueError(f"{name} must have one entry per battlefield")
        if any(c <= 0 for c in self.costs_a + self.costs_d):
            raise ValueError("unit costs must be positive integers")
        if self.budget_a < 0 or self.budget_d < 0:
            raise ValueError("budgets must be nonnegative")
        for s, o in enumerate(self.omegas):
            if not np.all(np.isfinite(o)):
                raise ValueError(f"loss matrix {s} has non-finite entries")
            if o.shape != (self.caps_a[s] + 1, self.caps_d[s] + 1):
                raise ValueError(
                    f"loss matrix {s} has shape {o.shape}, expected "
                    f"{(self.caps_a[s] + 1, self.caps_d[s] + 1)}"
                )

    @property
    def m(self):
        return len(self.omegas)


@dataclass
class BlottoReport:
    attacker_atoms: dict       # pure strategy (m-vector) -> weight
    defender_atoms: dict
    value: float
    gap: float                 # certified bound on the saddle-point gap
    gap_exact: float
    steps: int
    wall_time: float
    dims: tuple                # (attacker count, defender count), exact big ints
    primal_dim: int
    seed: int | None = None
    rounds: list = field(default_factory=list)

    def to_json_dict(self):
        return {
            "attacker_atoms": [{"index": list(k), "weight": float(v)}
                               for k, v in sorted(self.attacker_atoms.items())],
            "defender_atoms": [{"index": list(k), "weight": float(v)}
                               for k, v in sorted(self.defender_atoms.items())],
            "value": float(self.value),
            "gap": float(self.gap),
            "gap_exact": float(self.gap_exact),
            "steps": int(self.steps),
            "wall_time_s": float(self.wall_time),
            "dims": [str(d) for d in self.dims],  # may exceed 2^53
            "primal_dim": int(self.primal_dim),
            "seed": self.seed,
        }


def rank_factor(omega, tol=1e-9):
    """Factor omega = F @ G.T with rank(omega) terms, by Gaussian
    elimination with complete pivoting; stops when the residual drops
    below tol relative to the largest initial entry."""
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    resid = omega.copy()
    scale = max(1.0, float(np.abs(omega).max(initial=0.0)))
    fs, gs = [], []
    for _ in range(min(omega.shape)):
        i, j = np.unravel_index(np.argmax(np.abs(resid)), resid.shape)
        pivot = resid[i, j]
        if abs(pivot) <= tol * scale:
            break
        f = resid[:, j].copy()
        g = resid[i, :] / pivot
        fs.append(f)
        gs.append(g)
        resid = resid - np.outer(f, g)
    if not fs:
        # zero matrix: keep one zero term so the stage still contributes a row
        fs.append(np.zeros(omega.shape[0]))
        gs.append(np.zeros(omega.shape[1]))
    return np.stack(fs, axis=1), np.stack(gs, axis=1)


def build_blotto(spec):
    """Knapsack-generated matrices A (attacker) and D (defender) with
    A^T D reproducing the total-loss matrix."""
    f_tables, g_tables = [], []
    for omega in spec.omegas:
        F, G = rank_factor(omega)
        f_tables.append(F)        # (caps_a+1, r_s): row a -> attacker output
        g_tables.append(G)        # (caps_d+1, r_s)
    A = KnapsackOracle(KnapsackSpec(
        bounds=spec.caps_a, costs=spec.costs_a, budget=spec.budget_a,
        outputs=tuple(f_tables)))
    D = KnapsackOracle(KnapsackSpec(
        bounds=spec.caps_d, costs=spec.costs_d, budget=spec.budget_d,
        outputs=tuple(g_tables)))
    return BilinearSpSpec(A=A, D=D)


def solve_blotto(spec, config=None):
    """End-to-end run: factor, build the master, solve with the ellipsoid
    method, decode the atoms into pure strategies."""
    config = config or SolverConfig()
    t0 = time.perf_counter()
    game = build_blotto(spec)
    master = build_master_example2(game, shared_radius=True)
    sol = solve_sp(master, solver="ellipsoid", config=config)
    wall = time.perf_counter() - t0
    dims = (game.A.count_columns(), game.D.count_columns())
    return BlottoReport(
        attacker_atoms=dict(sol.z_atoms),
        defender_atoms=dict(sol.w_atoms),
        value=sol.value_estimate,
        gap=sol.gap_bound,
        gap_exact=sol.gap_exact,
        steps=sol.steps,
        wall_time=wall,
        dims=dims,
        primal_dim=2 * game.K,
        seed=spec.seed,
        rounds=sol.rounds,
    )


def random_rank1_omegas(m, caps_a, caps_d, seed=0):
    """Seeded rank-1 loss matrices with entries in [0, 1]: outer products
    of uniform factors, normalized to unit maximum per field."""
    rng = np.random.default_rng(seed)
    omegas = []
    for s in range(m):
        f = rng.uniform(0.0, 1.0, caps_a[s] + 1)
        g = rng.uniform(0.0, 1.0, caps_d[s] + 1)
        o = np.outer(f, g)
        omegas.append(o / o.max())
    return omegas


def blotto_from_json(obj):
    """BlottoSpec from {"m", "caps_a", "caps_d", "costs_a", "costs_d",
    "budget_a", "budget_d", "omega": [matrices] | {"rank1_seed": int}}."""
    if isinstance(obj, str):
        with open(obj) as fp:
            obj = json.load(fp)
    elif hasattr(obj, "read"):
        obj = json.load(obj)
    m = int(obj["m"])
    caps_a = [int(c) for c in obj["caps_a"]]
    caps_d = [int(c) for c in obj["caps_d"]]
    omega = obj["omega"]
    seed = None
    if isinstance(omega, dict):
        seed = int(omega["rank1_seed"])
        omegas = random_rank1_omegas(m, caps_a, caps_d, seed)
    else:
        omegas = [np.asarray(o, dtype=float) for o in omega]
    return BlottoSpec(
        caps_a=caps_a,
        caps_d=caps_d,
        costs_a=[int(c) for c in obj["costs_a"]],
        costs_d=[int(c) for c in obj["costs_d"]],
        budget_a=int(obj["budget_a"]),
        budget_d=int(obj["budget_d"]),
        omegas=omegas,
        seed=seed,
    )
