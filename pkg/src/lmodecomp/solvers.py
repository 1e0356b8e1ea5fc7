"""Certificate-producing solvers for the small primal problems.

Two solvers are provided: a central-cut ellipsoid method that records an
execution protocol over its productive steps and periodically computes
the best accuracy certificate for it, and projected mirror descent whose
step sizes directly induce a certificate.  Both operate on origin-centered
Euclidean balls or products of two such balls, where the residual has a
closed form and needs no LMO calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import (
    AccuracyCertificate,
    ExecutionProtocol,
    residual_ball_product,
)
from .domains import Ball, Product

__all__ = [
    "SolverConfig",
    "FieldOracle",
    "EllipsoidState",
    "central_cut_log_volume_ratio",
    "ellipsoid_cut",
    "ellipsoid_run",
    "md_run",
    "optimize_certificate",
]


@dataclass
class SolverConfig:
    eps_target: float = 1e-6
    max_steps: int = 20000
    cert_period: int | None = None  # default: 4 K^2, K the per-block dimension
    gap_threshold: float = 1e-4
    inner_iters: int = 25
    seed: int = 0
    start: np.ndarray | None = None

    def __post_init__(self):
        if self.eps_target <= 0:
            raise ValueError("eps_target must be positive")
        if self.cert_period is not None and self.cert_period < 1:
            raise ValueError("cert_period must be >= 1")


class FieldOracle:
    """Vector field xi -> F(xi), optionally returning a side payload
    (e.g. the matrix columns hit while evaluating the field)."""

    def __init__(self, fn):
        self.fn = fn

    def __call__(self, xi):
        out = self.fn(np.asarray(xi, dtype=float))
        if isinstance(out, tuple):
            value, payload = out
        else:
            value, payload = out, None
        value = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError("field oracle returned non-finite values")
        return value, payload


@dataclass
class EllipsoidState:
    """Ellipsoid {center + B u : ||u|| <= 1} after tau steps."""

    center: np.ndarray
    shape: np.ndarray
    tau: int


def _origin_ball_blocks(domain):
    """Decompose the domain into origin-centered ball blocks (one or two)."""
    if isinstance(domain, Ball):
        factors = [domain]
    elif isinstance(domain, Product) and all(isinstance(f, Ball) for f in domain.factors):
        factors = domain.factors
    else:
        raise ValueError("solver domains must be a ball or a product of balls")
    if len(factors) > 2:
        raise ValueError("at most two ball factors are supported")
    for f in factors:
        if np.any(f.center != 0.0):
            raise ValueError("ball factors must be centered at the origin")
    return [(f.dim, f.radius) for f in factors]


def _radii_split(blocks, dim):
    if len(blocks) == 1:
        return (blocks[0][1], 0.0), dim
    return (blocks[0][1], blocks[1][1]), blocks[0][0]


def _default_cert_period(blocks):
    k = max(d for d, _ in blocks)
    return 4 * k * k


def central_cut_log_volume_ratio(n):
    """log of vol(E+)/vol(E) for one central cut in dimension n."""
    n = float(n)
    return n * np.log(n / np.sqrt(n * n - 1.0)) + 0.5 * np.log((n - 1.0) / (n + 1.0))


def ellipsoid_cut(center, shape, g):
    """One central-cut update keeping the half-space {x: <g, x - center> <= 0}."""
    n = center.shape[0]
    bg = shape.T @ g
    nbg = float(np.linalg.norm(bg))
    if nbg <= 1e-14 * float(np.linalg.norm(g)):
        raise RuntimeError(
            "ellipsoid shape matrix is numerically singular along the cut direction; "
            "the method cannot make further progress"
        )
    p = bg / nbg
    bp = shape @ p
    center_new = center - bp / (n + 1.0)
    beta = n / np.sqrt(n * n - 1.0)
    gamma = 1.0 - np.sqrt((n - 1.0) / (n + 1.0))
    shape_new = beta * (shape - gamma * np.outer(bp, p))
    return center_new, shape_new


def ellipsoid_run(field, domain, config=None, on_certificate=None):
    """Central-cut ellipsoid with accuracy certificates.

    At productive steps (center inside the domain) the cut direction is the
    field value, which is recorded into the protocol; at non-productive
    steps a separating hyperplane of the violated ball factor is used.
    Every cert_period steps the best certificate for the protocol so far is
    computed; `on_certificate(protocol, cert, res)` may return an exact gap,
    and the run stops when that gap falls below gap_threshold, when the
    certified residual falls below eps_target, or at max_steps.

    Returns (protocol, certificate, history); history holds one record
    {step, productive, residual, gap} per certificate round.
    """
    config = config or SolverConfig()
    blocks = _origin_ball_blocks(domain)
    n = domain.dim
    if n < 2:
        raise ValueError("ellipsoid method requires dimension >= 2")
    radii, split = _radii_split(blocks, n)
    cert_period = config.cert_period or _default_cert_period(blocks)

    r0 = float(np.sqrt(sum(r * r for _, r in blocks)))
    center = np.zeros(n)
    shape = r0 * np.eye(n)

    points, fields, ids, payloads = [], [], [], []
    history = []
    best_cert, best_res = None, np.inf
    last_cert_len = 0
    stationary = False

    def certificate_round(step):
        nonlocal best_cert, best_res, last_cert_len
        protocol = ExecutionProtocol.from_lists(points, fields, ids, dim=n)
        warm = None
        if best_cert is not None:
            pad = np.zeros(len(protocol))
            pad[:len(best_cert)] = best_cert.weights
            warm = AccuracyCertificate(pad)
        cert = optimize_certificate(protocol, radii, split, warm_start=warm,
                                    inner_iters=config.inner_iters,
                                    tol=0.1 * config.eps_target)
        res = residual_ball_product(protocol, cert, radii, split)
        if res <= best_res:
            best_cert, best_res = cert, res
        else:
            best_cert, best_res = (warm if warm is not None else cert), min(best_res, res)
        last_cert_len = len(protocol)
        gap = on_certificate(protocol, best_cert, best_res) if on_certificate else None
        history.append({"step": step, "productive": len(protocol),
                        "residual": best_res, "gap": gap})
        stop = best_res <= config.eps_target or (
            gap is not None and gap <= config.gap_threshold
        )
        return stop

    step = 0
    for step in range(1, config.max_steps + 1):
        if domain.contains(center, tol=0.0):
            value, payload = field(center)
            points.append(center.copy())
            fields.append(value)
            ids.append(step)
            payloads.append(payload)
            g = value
            if np.linalg.norm(g) <= 1e-15:
                stationary = True  # exact stationary point; nothing left to cut
        else:
            g = np.zeros(n)
            off = 0
            for d, r in blocks:
                block = center[off:off + d]
                if np.linalg.norm(block) > r:
                    g[off:off + d] = block / np.linalg.norm(block)
                    break
                off += d
        if stationary:
            break
        try:
            center, shape = ellipsoid_cut(center, shape, g)
        except RuntimeError:
            break  # ellipsoid collapsed numerically; stop and certify what we have
        if points and step % cert_period == 0:
            if certificate_round(step):
                break

    if points and len(points) > last_cert_len:
        certificate_round(step)
    if not points:
        raise RuntimeError("ellipsoid run produced no productive steps")

    protocol = ExecutionProtocol.from_lists(points, fields, ids, dim=n)
    protocol_payloads = payloads
    return protocol, best_cert, {
        "rounds": history,
        "payloads": protocol_payloads,
        "state": EllipsoidState(center, shape, step),
    }


def _project_blocks(x, blocks):
    out = x.copy()
    off = 0
    for d, r in blocks:
        block = out[off:off + d]
        nb = np.linalg.norm(block)
        if nb > r:
            out[off:off + d] = block * (r / nb)
        off += d
    return out


def md_run(field, domain, config=None, on_certificate=None):
    """Projected (Euclidean) mirror descent with step-size certificates.

    Steps xi_{i+1} = Proj(xi_i - gamma_i F(xi_i)) with gamma_i = R/(Lhat sqrt(i)),
    Lhat a running max of the field norms; the certificate weights are the
    normalized step sizes.  All steps are productive.
    """
    config = config or SolverConfig()
    blocks = _origin_ball_blocks(domain)
    n = domain.dim
    cert_period = config.cert_period or _default_cert_period(blocks)
    radii, split = _radii_split(blocks, n)
    r_total = float(np.sqrt(sum(r * r for _, r in blocks)))

    xi = np.zeros(n) if config.start is None else np.asarray(config.start, dtype=float).copy()
    xi = _project_blocks(xi, blocks)
    points, fields, ids, gammas = [], [], [], []
    lhat = 0.0
    for i in range(1, config.max_steps + 1):
        value, _ = field(xi)
        points.append(xi.copy())
        fields.append(value)
        ids.append(i)
        lhat = max(lhat, float(np.linalg.norm(value)), 1e-30)
        gamma = r_total / (lhat * np.sqrt(i))
        gammas.append(gamma)
        xi = _project_blocks(xi - gamma * value, blocks)
        if on_certificate and i % cert_period == 0:
            protocol = ExecutionProtocol.from_lists(points, fields, ids, dim=n)
            w = np.array(gammas)
            cert = AccuracyCertificate(w / w.sum())
            res = residual_ball_product(protocol, cert, radii, split)
            gap = on_certificate(protocol, cert, res)
            if res <= config.eps_target or (gap is not None and gap <= config.gap_threshold):
                break

    protocol = ExecutionProtocol.from_lists(points, fields, ids, dim=n)
    w = np.array(gammas)
    cert = AccuracyCertificate(w / w.sum())
    return protocol, cert


def optimize_certificate(protocol, radii, split, warm_start=None, inner_iters=25, tol=None):
    """Best accuracy certificate for a protocol over a product of
    origin-centered balls.

    The objective sum_i lam_i c_i + R_U ||sum lam_i G_i|| + R_V ||sum lam_i H_i||
    depends on lam only through the aggregate (sum lam_i c_i, sum lam_i F_i),
    so it is minimized over the convex hull of the t points (c_i, F_i) by a
    fully corrective conditional-gradient loop: an accurate solve restricted
    to a small active set of protocol entries alternates with adding the
    entry that minimizes the linearized objective.  The norm kinks at zero
    are handled by a decreasing smoothing schedule.  The result is never
    worse than uniform weights, nor than the warm start when one is given.
    """
    from scipy.optimize import minimize

    t = len(protocol)
    if t == 0:
        raise ValueError("cannot optimize a certificate for an empty protocol")
    r_u, r_v = radii
    c = np.sum(protocol.field_values * protocol.points, axis=1)
    hull = np.hstack([c[:, None], protocol.field_values])  # t x (1 + dim)
    kg = split

    def objective(lam):
        agg = lam @ hull
        return float(agg[0]
                     + r_u * np.linalg.norm(agg[1:1 + kg])
                     + r_v * np.linalg.norm(agg[1 + kg:]))

    def obj_smooth(y, mu):
        a = y[1:1 + kg]
        b = y[1 + kg:]
        return y[0] + r_u * np.sqrt(a @ a + mu * mu) + r_v * np.sqrt(b @ b + mu * mu)

    def grad_smooth(y, mu):
        g = np.zeros_like(y)
        g[0] = 1.0
        a = y[1:1 + kg]
        g[1:1 + kg] = r_u * a / np.sqrt(a @ a + mu * mu)
        b = y[1 + kg:]
        g[1 + kg:] = r_v * b / np.sqrt(b @ b + mu * mu)
        return g

    candidates = [np.full(t, 1.0 / t)]
    if warm_start is not None:
        if len(warm_start) != t:
            raise ValueError("warm start length must match the protocol")
        candidates.append(warm_start.weights)
    seed = min(candidates, key=objective)

    active = list(np.nonzero(seed > 1e-9)[0][:60])
    if not active:
        active = [int(np.argmax(seed))]
    w = np.maximum(seed[active], 1e-16)
    w /= w.sum()
    scale = max(1.0, float(np.abs(hull).max()))
    gap_tol = max(1e-13 * scale, 0.0 if tol is None else 0.25 * tol)
    ones = np.ones

    # skip smoothing stages finer than what the requested accuracy needs
    stages = [mu * scale for mu in (1e-5, 1e-10, 1e-14)]
    stages = stages[:1] + [mu for mu in stages[1:] if (r_u + r_v) * mu * 10.0 > gap_tol]
    for mu in stages:
        for _ in range(inner_iters):
            rows = hull[active]
            m = len(active)
            res = minimize(
                lambda l: obj_smooth(l @ rows, mu), w,
                jac=lambda l: rows @ grad_smooth(l @ rows, mu),
                method="SLSQP", bounds=[(0.0, 1.0)] * m,
                constraints=[{"type": "eq", "fun": lambda l: l.sum() - 1.0,
                              "jac": lambda l: ones(m)}],
                options={"maxiter": 60, "ftol": 1e-16},
            )
            w = np.maximum(res.x, 0.0)
            w /= w.sum()
            y = w @ rows
            g = grad_smooth(y, mu)
            vals = hull @ g
            order = np.argsort(vals)
            if float(y @ g - vals[order[0]]) <= gap_tol:
                break  # conditional-gradient gap certifies (smoothed) optimality
            added = 0
            for j in order[:4]:  # batch a few entries per master solve
                j = int(j)
                if j not in active:
                    active.append(j)
                    w = np.append(w, 0.0)
                    added += 1
            keep = w > 1e-14
            keep[-max(added, 1):] = True
            active = [a for a, k in zip(active, keep) if k]
            w = w[keep]
            s = w.sum()
            w = w / s if s > 0 else np.full(len(w), 1.0 / len(w))

    lam = np.zeros(t)
    lam[active] = w
    best = min(candidates + [lam], key=objective)
    best = np.maximum(best, 0.0)
    best /= best.sum()
    return AccuracyCertificate(best)
