"""
Numeric oracle for the order-ω single-symbol regime.

A jet of ∇^ω Riem is generated from the (ω+2)-th derivatives of a linearized
metric perturbation h at the base point:

    R_abcd = ½(∂_bc h_ad + ∂_ad h_bc - ∂_ac h_bd - ∂_bd h_ac)

so the Riemann monoterm symmetries, both Bianchi identities and the symmetry
of the derivative slots hold by construction. The remaining hypotheses
(∇^ω scal = 0, optionally Sym ∇^ω Ric = 0) are linear constraints on the
independent components of ∂^{ω+2}h, imposed by orthogonal projection onto the
constraint nullspace.

Jet layout: ``jet[d_1, ..., d_ω, i, a, b, j] = ∇_{d_1...d_ω} R_{iabj}``.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable
from dataclasses import dataclass, replace
from functools import lru_cache
from math import prod
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import null_space

from .expr import Expression, Monomial
from .reduce import BasisCombination, InvariantTag, pattern
from .report import ReportItem, bool_item

if TYPE_CHECKING:
    from .rules import HypothesisSet

logger = logging.getLogger(__name__)

MAX_COMPONENTS = 10**7
DEGENERATE_NORM = 1e-6
RESIDUAL_TOL = 1e-12
DEFAULT_TOL = 1e-8
WITNESS_FLOOR = -1e-10

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class OracleError(RuntimeError):
    """The constraint nullspace is trivial or the requested jet is too large."""


@dataclass(frozen=True)
class JetSample:
    n: int
    omega: int
    seed: int
    jet: np.ndarray
    residual: float
    params: np.ndarray
    sym_ric: bool = False

    @property
    def ric(self) -> np.ndarray:
        return np.einsum("...abad->...bd", self.jet)

    @property
    def scal(self) -> np.ndarray:
        return np.einsum("...abab->...", self.jet)

    def scaled(self, factor: float) -> JetSample:
        return replace(self, jet=self.jet * factor, params=self.params * factor)


@dataclass(frozen=True)
class EvalResult:
    value: float
    conditioning: float


# ============================================================================
# Jet construction
# ============================================================================


def _parameters(n: int, omega: int) -> list[tuple[tuple[int, ...], tuple[int, int]]]:
    derivs = list(itertools.combinations_with_replacement(range(n), omega + 2))
    pairs = [(x, y) for x in range(n) for y in range(x, n)]
    return [(dd, pp) for dd in derivs for pp in pairs]


def _metric_jet(params: np.ndarray, n: int, omega: int) -> np.ndarray:
    """Totally symmetric ∂^{ω+2}h from its independent components."""
    k = omega + 2
    g = np.zeros((n,) * (k + 2))
    for value, (dd, (x, y)) in zip(params, _parameters(n, omega), strict=True):
        if value:
            g[dd + (x, y)] = value
    g = 0.5 * (g + np.swapaxes(g, k, k + 1))
    perms = list(itertools.permutations(range(k)))
    out = np.zeros_like(g)
    for perm in perms:
        out += np.transpose(g, perm + (k, k + 1))
    return out / len(perms)


def _riemann_jet(g: np.ndarray, omega: int) -> np.ndarray:
    """∇^ω Riem from ∂^{ω+2}h; the first ω axes of ``g`` are the outer derivatives."""
    t1 = np.einsum("...bcad->...abcd", g)
    t2 = np.einsum("...adbc->...abcd", g)
    t3 = np.einsum("...acbd->...abcd", g)
    t4 = np.einsum("...bdac->...abcd", g)
    return 0.5 * (t1 + t2 - t3 - t4)


def _constraints(jet: np.ndarray, omega: int, sym_ric: bool) -> np.ndarray:
    rows = [np.einsum("...abab->...", jet).ravel()]
    if sym_ric:
        ric = np.einsum("...abad->...bd", jet)
        k = omega + 2
        sym = sum(np.transpose(ric, perm) for perm in itertools.permutations(range(k)))
        rows.append(np.asarray(sym).ravel())
    return np.concatenate(rows)


@lru_cache(maxsize=8)
def constraint_nullspace(n: int, omega: int, sym_ric: bool) -> np.ndarray:
    """Orthonormal basis of admissible parameter vectors, shared per (n, ω, flags)."""
    if n < 3 or omega < 1:
        raise OracleError(f"Oracle needs n >= 3 and omega >= 1, got n={n}, omega={omega}")
    if n ** (omega + 4) > MAX_COMPONENTS:
        raise OracleError(f"Jet with n={n}, omega={omega} exceeds {MAX_COMPONENTS} components")
    size = len(_parameters(n, omega))
    cols = []
    for k in range(size):
        unit = np.zeros(size)
        unit[k] = 1.0
        cols.append(_constraints(_riemann_jet(_metric_jet(unit, n, omega), omega), omega, sym_ric))
    basis = null_space(np.stack(cols, axis=1))
    if basis.shape[1] == 0:
        raise OracleError(f"Constraint nullspace is trivial for n={n}, omega={omega}, sym_ric={sym_ric}")
    logger.debug("oracle n=%d omega=%d sym_ric=%s: %d parameters, nullity %d", n, omega, sym_ric, size, basis.shape[1])
    return basis


def sample_jet(n: int, omega: int, seed: int, h: HypothesisSet | None = None) -> JetSample:
    """Standard-normal draw projected onto the admissible jets."""
    sym_ric = bool(h and h.sym_ric_vanish)
    basis = constraint_nullspace(n, omega, sym_ric)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        draw = rng.standard_normal(basis.shape[0])
        params = basis @ (basis.T @ draw)
        if np.linalg.norm(params) >= DEGENERATE_NORM:
            break
        logger.debug("degenerate draw for seed %d, redrawing", seed)
    else:
        raise OracleError(f"No admissible draw for seed {seed}")
    jet = _riemann_jet(_metric_jet(params, n, omega), omega)
    res = _constraints(jet, omega, sym_ric)
    residual = float(np.max(np.abs(res))) if res.size else 0.0
    return JetSample(n, omega, seed, jet, residual, params, sym_ric)


def project(j: JetSample) -> JetSample:
    """Re-project a sample onto the admissible jets; a no-op up to rounding."""
    basis = constraint_nullspace(j.n, j.omega, j.sym_ric)
    params = basis @ (basis.T @ j.params)
    return replace(j, jet=_riemann_jet(_metric_jet(params, j.n, j.omega), j.omega), params=params)


def symmetry_residuals(j: JetSample) -> dict[str, float]:
    """Max residuals of the identities built into the construction."""
    jet = j.jet
    w = j.omega
    out = {
        "antisym": np.abs(jet + np.einsum("...abcd->...bacd", jet)).max(),
        "pair-exchange": np.abs(jet - np.einsum("...abcd->...cdab", jet)).max(),
        "first-bianchi": np.abs(
            jet + np.einsum("...abcd->...acdb", jet) + np.einsum("...abcd->...adbc", jet)
        ).max(),
    }
    if w >= 1:
        # ∇_e R_abcd + ∇_c R_abde + ∇_d R_abec over the last derivative slot
        second = jet + np.einsum("...cabde->...eabcd", jet) + np.einsum("...dabec->...eabcd", jet)
        out["second-bianchi"] = np.abs(second).max()
    if w >= 2:
        out["deriv-symmetry"] = np.abs(jet - np.swapaxes(jet, 0, 1)).max()
    return {k: float(v) for k, v in out.items()}


# ============================================================================
# Evaluation
# ============================================================================


def _factor_array(kind: str, j: JetSample) -> np.ndarray:
    if kind == "Riem":
        return j.jet
    if kind == "Ric":
        return j.ric
    return j.scal


def eval_monomial(m: Monomial, j: JetSample) -> tuple[float, float]:
    if any(f.order < j.omega for f in m.factors):
        return 0.0, 0.0
    if any(f.order != j.omega for f in m.factors):
        raise ValueError(f"Oracle evaluates order-{j.omega} factors only: {m.to_text()}")
    if m.free_labels:
        raise ValueError(f"Oracle evaluates scalars only: {m.to_text()}")
    letters = {x: _LETTERS[k] for k, x in enumerate(sorted(m.labels))}
    subs = ",".join("".join(letters[x] for x in f.deriv + f.body) for f in m.factors)
    arrays = [_factor_array(f.kind, j) for f in m.factors]
    value = float(np.einsum(f"{subs}->", *arrays, optimize=True))
    cond = max(float(np.abs(a).max()) for a in arrays) ** len(arrays)
    return float(m.coeff) * value, cond


def eval_expression(e: Expression, j: JetSample) -> EvalResult:
    total = 0.0
    cond = 0.0
    for m in e:
        v, c = eval_monomial(m, j)
        total += v
        cond = max(cond, c)
    return EvalResult(total, cond)


def eval_invariant(tag: InvariantTag | Expression, j: JetSample) -> EvalResult:
    if isinstance(tag, Expression):
        return eval_expression(tag, j)
    e = pattern(tag, j.omega)
    if not e.monomials:
        raise ValueError(f"{tag} is out of range for omega={j.omega}")
    return eval_expression(e, j)


def eval_combination(comb: BasisCombination, j: JetSample) -> float:
    return sum(float(c) * eval_invariant(tag, j).value for tag, c in comb.terms)


# ============================================================================
# Report fragments
# ============================================================================


def samples(n: int, omega: int, seed: int, count: int, h: HypothesisSet | None = None) -> list[JetSample]:
    return [sample_jet(n, omega, seed + k, h) for k in range(count)]


def cross_check(
    name: str,
    e: Expression,
    reduction: BasisCombination,
    jets: Iterable[JetSample],
    tol: float = DEFAULT_TOL,
) -> ReportItem:
    """Direct evaluation of ``e`` against evaluation of its reduction, sample by sample."""
    jets = list(jets)
    ok = 0
    worst = 0.0
    for j in jets:
        lhs = eval_expression(e, j).value
        rhs = eval_combination(reduction, j)
        err = abs(lhs - rhs) / max(1.0, abs(lhs))
        worst = max(worst, err)
        ok += err <= tol
    return ReportItem(
        name=name,
        expected=f"{len(jets)}/{len(jets)} within {tol:g}",
        computed=f"{ok}/{len(jets)}",
        exact=False,
        tolerance=tol,
        seed=jets[0].seed if jets else None,
        status="pass" if ok == len(jets) else "fail",
        detail=f"max relative error {worst:.1e}",
    )


def positivity(name: str, values: Iterable[float], floor: float = WITNESS_FLOOR) -> ReportItem:
    values = list(values)
    good = sum(v >= floor for v in values)
    low = min(values) if values else 0.0
    return bool_item(
        name,
        good == len(values),
        f"{len(values)}/{len(values)} >= {floor:g}",
        f"{good}/{len(values)}",
        detail=f"min {low:.3g}",
    )


def witness_items(jets: list[JetSample], tags: Iterable[InvariantTag]) -> list[ReportItem]:
    """T_ℓ, R_ℓ, T_ℓ - M_ℓ and T_ℓ - 2M_ℓ + N_ℓ nonnegative on every sample."""
    tags = list(tags)
    values = {tag: [eval_invariant(tag, j).value for j in jets] for tag in tags}
    zeros = [0.0] * len(jets)
    items = []
    for tag in tags:
        if tag.family in ("T", "R"):
            items.append(positivity(f"oracle-nonneg[{tag}]", values[tag]))
    for t in [t for t in tags if t.family == "T"]:
        m, nn = InvariantTag("M", t.ell), InvariantTag("N", t.ell)
        if m not in values:
            continue
        tv, mv, nv = values[t], values[m], values.get(nn, zeros)
        items.append(positivity(f"oracle-nonneg[T_{t.ell}-M_{t.ell}]", (a - b for a, b in zip(tv, mv, strict=True))))
        items.append(
            positivity(f"oracle-nonneg[T_{t.ell}-2M_{t.ell}+N_{t.ell}]", (a - 2 * b + c for a, b, c in zip(tv, mv, nv, strict=True)))
        )
    return items


def property_items(j: JetSample) -> list[ReportItem]:
    """Construction residuals, projection idempotence and quadratic scaling on one sample."""
    items = []
    res = symmetry_residuals(j)
    worst = max([*res.values(), j.residual])
    items.append(bool_item("oracle-residuals", worst <= RESIDUAL_TOL * max(1.0, float(np.abs(j.jet).max())), f"<= {RESIDUAL_TOL:g}", f"{worst:.1e}"))
    drift = float(np.abs(project(j).jet - j.jet).max())
    items.append(bool_item("oracle-projection", drift <= RESIDUAL_TOL * max(1.0, float(np.abs(j.jet).max())), f"<= {RESIDUAL_TOL:g}", f"{drift:.1e}"))
    t0 = eval_invariant(InvariantTag("T", 0), j).value
    t0_scaled = eval_invariant(InvariantTag("T", 0), j.scaled(2.0)).value
    rel = abs(t0_scaled - 4 * t0) / max(1.0, abs(4 * t0))
    items.append(bool_item("oracle-scaling", rel <= 1e-10, "T_0(2 jet) = 4 T_0(jet)", f"relative error {rel:.1e}"))
    return items


def component_count(n: int, omega: int) -> int:
    return prod([n] * (omega + 4))
