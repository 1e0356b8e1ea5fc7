"""Execution protocols, accuracy certificates and residuals.

A protocol records the search points visited by a first-order method
together with the vector-field values at those points.  A certificate is
a probability vector over the protocol entries.  Together they yield a
weighted approximate solution and a computable residual that upper
bounds the saddle-point gap (or the VI dual gap) of that solution.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExecutionProtocol",
    "AccuracyCertificate",
    "ResidualReport",
    "residual",
    "weighted_point",
    "residual_ball_product",
    "protocol_records",
    "dump_protocol_json",
    "load_protocol_json",
]


@dataclass(frozen=True)
class ExecutionProtocol:
    """Search points w_i with field values F_i = M(w_i) and step ids."""

    points: np.ndarray        # (t, d)
    field_values: np.ndarray  # (t, d)
    step_ids: tuple           # length t, global solver step indices
    dim: int

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        fv = np.atleast_2d(np.asarray(self.field_values, dtype=float))
        ids = tuple(int(i) for i in self.step_ids)
        if pts.shape != fv.shape or len(ids) != pts.shape[0]:
            raise ValueError("points, field_values and step_ids must have equal length")
        if pts.shape[0] > 0 and pts.shape[1] != self.dim:
            raise ValueError(f"point dimension {pts.shape[1]} != declared dim {self.dim}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "field_values", fv)
        object.__setattr__(self, "step_ids", ids)

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def from_lists(cls, points, field_values, step_ids, dim=None):
        pts = np.asarray(points, dtype=float).reshape(len(points), -1)
        if dim is None:
            dim = pts.shape[1] if pts.size else 0
        return cls(pts, np.asarray(field_values, dtype=float).reshape(pts.shape),
                   tuple(step_ids), dim)

    def prefix(self, t):
        """Sub-protocol of the first t entries."""
        return ExecutionProtocol(self.points[:t], self.field_values[:t],
                                 self.step_ids[:t], self.dim)


@dataclass(frozen=True)
class AccuracyCertificate:
    """Nonnegative weights summing to one, one per protocol entry."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValueError("certificate weights must be a vector")
        if np.any(w < 0):
            raise ValueError("certificate weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"certificate weights sum to {w.sum()}, expected 1")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.shape[0]

    @classmethod
    def uniform(cls, t):
        return cls(np.full(t, 1.0 / t))


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    witness: np.ndarray  # the point of W realizing the max in the residual
    lmo_value: float


def _check_pair(protocol, cert):
    if len(protocol) != len(cert):
        raise ValueError(
            f"certificate length {len(cert)} does not match protocol length {len(protocol)}"
        )


def weighted_point(protocol, cert):
    """Convex combination sum_i lambda_i w_i of the protocol points."""
    _check_pair(protocol, cert)
    return cert.weights @ protocol.points


def residual(protocol, cert, domain):
    """Res = sum_i lambda_i <F_i, w_i> - min_{w in W} <sum_i lambda_i F_i, w>.

    Makes exactly one LMO call, on the aggregated field.
    """
    _check_pair(protocol, cert)
    if protocol.dim != domain.dim:
        raise ValueError(
            f"protocol dim {protocol.dim} does not match domain dim {domain.dim}"
        )
    lam = cert.weights
    # pairwise summation via np.sum keeps accumulation error small on long protocols
    diag = float(np.sum(lam * np.sum(protocol.field_values * protocol.points, axis=1)))
    agg = lam @ protocol.field_values
    witness, lmo_value = domain.lmo(agg)
    return ResidualReport(residual=diag - lmo_value, witness=witness, lmo_value=lmo_value)


def residual_ball_product(protocol, cert, radii, split):
    """Closed-form residual when W is a product of origin-centered balls.

    The field values split at `split` into blocks (G_i, H_i); the residual
    equals sum_i lambda_i <F_i, w_i> + R_U ||sum lambda G|| + R_V ||sum lambda H||.
    No LMO call is needed.
    """
    _check_pair(protocol, cert)
    if not 0 <= split <= protocol.dim:
        raise ValueError(f"split index {split} out of range for dim {protocol.dim}")
    r_u, r_v = radii
    lam = cert.weights
    diag = float(np.sum(lam * np.sum(protocol.field_values * protocol.points, axis=1)))
    g_agg = lam @ protocol.field_values[:, :split]
    h_agg = lam @ protocol.field_values[:, split:]
    return diag + r_u * float(np.linalg.norm(g_agg)) + r_v * float(np.linalg.norm(h_agg))


def protocol_records(protocol, cert):
    """Protocol + certificate as a list of plain-dict records."""
    _check_pair(protocol, cert)
    return [
        {
            "step": int(protocol.step_ids[i]),
            "point": protocol.points[i].tolist(),
            "field": protocol.field_values[i].tolist(),
            "weight": float(cert.weights[i]),
        }
        for i in range(len(protocol))
    ]


def dump_protocol_json(protocol, cert, fp):
    json.dump(protocol_records(protocol, cert), fp)


def load_protocol_json(fp):
    records = json.load(fp)
    points = [r["point"] for r in records]
    fields = [r["field"] for r in records]
    steps = [r["step"] for r in records]
    weights = np.array([r["weight"] for r in records], dtype=float)
    dim = len(points[0]) if points else 0
    protocol = ExecutionProtocol.from_lists(points, fields, steps, dim)
    return protocol, AccuracyCertificate(weights)
