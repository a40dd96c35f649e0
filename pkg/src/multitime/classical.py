"""Multi-time classical mechanics.

Phase-space vector fields (v_j, w_j) drive one world line per particle,
each parametrized by its own time.  The flow-commutation consistency
condition is

    D_j v_k = 0  and  D_j w_k = 0   for all j != k,

with D_j = d/dt_j + v_j . grad_{x_j} + w_j . grad_{p_j}.  The module also
builds n-paths by equal-time integration, tests their validity at
spacelike off-diagonal time choices, integrates the two-time full-grid
variant, and runs the no-interaction demonstration over a field family.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .expr import Expression, evaluate, free_variables, parse_expression
from .numdiff import diff_callable, partial_derivative
from .paths import NPath, WorldLine
from .reports import DefectReport, ResidualReport

__all__ = [
    "SpacetimePoint",
    "is_spacelike",
    "boost",
    "PhasePoint",
    "PhaseVectorField",
    "hamiltonian_vector_field",
    "classical_consistency_defect",
    "evolve_equal_time",
    "validity_residual",
    "GridSolution",
    "evolve_full_grid",
    "grid_path_independence",
    "cjs_demo",
]


@dataclass(frozen=True)
class SpacetimePoint:
    """(t, x) with x of dimension d; natural units, c = 1."""

    t: float
    x: tuple[float, ...]

    @staticmethod
    def of(t: float, x) -> "SpacetimePoint":
        x = np.atleast_1d(np.asarray(x, float))
        return SpacetimePoint(float(t), tuple(float(v) for v in x))


def is_spacelike(points: Sequence[SpacetimePoint]) -> bool:
    """True iff all pairs are strictly spacelike: (dt)^2 < |dx|^2."""
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            dt = points[i].t - points[j].t
            dx = np.asarray(points[i].x) - np.asarray(points[j].x)
            if dt * dt >= float(dx @ dx):
                return False
    return True


def boost(point: SpacetimePoint, rapidity: float, axis: int = 0) -> SpacetimePoint:
    """Lorentz boost along spatial ``axis`` with the given rapidity."""
    c, s = math.cosh(rapidity), math.sinh(rapidity)
    x = list(point.x)
    t_new = c * point.t - s * x[axis]
    x[axis] = -s * point.t + c * x[axis]
    return SpacetimePoint(t_new, tuple(x))


@dataclass
class PhasePoint:
    """Positions and momenta of all particles plus the time tuple."""

    times: np.ndarray  # (n,)
    x: np.ndarray  # (n, d)
    p: np.ndarray  # (n, d)

    def __post_init__(self):
        self.times = np.atleast_1d(np.asarray(self.times, float))
        self.x = np.atleast_2d(np.asarray(self.x, float))
        self.p = np.atleast_2d(np.asarray(self.p, float))
        if not (len(self.times) == self.x.shape[0] == self.p.shape[0]):
            raise ValueError("inconsistent particle count in PhasePoint")

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def bindings(self) -> dict[str, float]:
        b: dict[str, float] = {}
        for j in range(self.n):
            b[f"t{j + 1}"] = float(self.times[j])
            for dd in range(self.d):
                b[f"x{j + 1}_{dd + 1}"] = float(self.x[j, dd])
                b[f"p{j + 1}_{dd + 1}"] = float(self.p[j, dd])
        return b


# A field component maps variable bindings to a real value.
Component = Callable[[Mapping[str, float]], float]


def _expr_component(expr: Expression) -> Component:
    return lambda b: evaluate(expr, b)


def _grad_component(expr: Expression, var: str, sign: float, h: float | None) -> Component:
    return lambda b: sign * partial_derivative(expr, var, b, h=h)


@dataclass
class PhaseVectorField:
    """The fields (v_1, w_1, .., v_n, w_n) as per-component callables."""

    n: int
    d: int
    masses: tuple[float, ...]
    v: list[list[Component]]  # n lists of d components
    w: list[list[Component]]
    label: str = "field"

    def eval_v(self, j: int, bindings: Mapping[str, float]) -> np.ndarray:
        """v_j (1-based) at the bound phase-space point."""
        return np.array([c(bindings) for c in self.v[j - 1]])

    def eval_w(self, j: int, bindings: Mapping[str, float]) -> np.ndarray:
        return np.array([c(bindings) for c in self.w[j - 1]])

    @classmethod
    def from_expressions(cls, n: int, d: int, masses: Sequence[float],
                         v_exprs: Sequence[Sequence[str | Expression]],
                         w_exprs: Sequence[Sequence[str | Expression]],
                         label: str = "field") -> "PhaseVectorField":
        def compile_rows(rows):
            out = []
            for row in rows:
                comps = []
                for e in row:
                    expr = parse_expression(e) if isinstance(e, str) else e
                    _check_vars(expr, n, d)
                    comps.append(_expr_component(expr))
                out.append(comps)
            return out

        if len(v_exprs) != n or len(w_exprs) != n:
            raise ValueError(f"need {n} rows of v and w expressions")
        return cls(n, d, tuple(float(m) for m in masses),
                   compile_rows(v_exprs), compile_rows(w_exprs), label=label)

    @classmethod
    def free(cls, n: int, d: int, masses: Sequence[float]) -> "PhaseVectorField":
        """v_j = p_j / m_j, w_j = 0."""
        v = [[f"p{j + 1}_{dd + 1} / {masses[j]}" for dd in range(d)] for j in range(n)]
        w = [["0" for _ in range(d)] for _ in range(n)]
        return cls.from_expressions(n, d, masses, v, w, label="free")


def _check_vars(expr: Expression, n: int, d: int) -> None:
    allowed = {f"t{j + 1}" for j in range(n)}
    for j in range(n):
        for dd in range(d):
            allowed.add(f"x{j + 1}_{dd + 1}")
            allowed.add(f"p{j + 1}_{dd + 1}")
    extra = free_variables(expr) - allowed
    if extra:
        raise ValueError(f"undeclared variables {sorted(extra)} in field expression")


def hamiltonian_vector_field(h_exprs: str | Expression | Sequence[str | Expression],
                             n: int, d: int, masses: Sequence[float],
                             h: float | None = None,
                             gradients: dict | None = None) -> PhaseVectorField:
    """Field with v_j = grad_{p_j} H, w_j = -grad_{x_j} H.

    ``h_exprs`` is either a single Hamiltonian (every particle moves under
    it) or one partial Hamiltonian per particle (particle j moves under
    H_j).  Gradients are central differences unless explicit expressions
    are supplied in ``gradients`` as {"v": [[..]], "w": [[..]]}.
    """
    if isinstance(h_exprs, (str, Expression)):
        exprs = [h_exprs] * n
    else:
        exprs = list(h_exprs)
        if len(exprs) != n:
            raise ValueError(f"need 1 or {n} Hamiltonian expressions")
    parsed = [parse_expression(e) if isinstance(e, str) else e for e in exprs]
    for e in parsed:
        _check_vars(e, n, d)

    if gradients is not None:
        return PhaseVectorField.from_expressions(
            n, d, masses, gradients["v"], gradients["w"], label="hamiltonian")

    v = [[_grad_component(parsed[j], f"p{j + 1}_{dd + 1}", 1.0, h)
          for dd in range(d)] for j in range(n)]
    w = [[_grad_component(parsed[j], f"x{j + 1}_{dd + 1}", -1.0, h)
          for dd in range(d)] for j in range(n)]
    return PhaseVectorField(n, d, tuple(float(m) for m in masses), v, w,
                            label="hamiltonian")


def classical_consistency_defect(field: PhaseVectorField, point: PhasePoint,
                                 h: float = 1e-4) -> DefectReport:
    """Sup-norm of (D_j v_k, D_j w_k) for every ordered pair j != k."""
    if h <= 0.0:
        raise ValueError(f"step must be positive, got {h}")
    b = point.bindings()
    n, d = field.n, field.d
    vj = [field.eval_v(j, b) for j in range(1, n + 1)]
    wj = [field.eval_w(j, b) for j in range(1, n + 1)]

    def apply_dj(j: int, comp: Component) -> float:
        val = diff_callable(comp, f"t{j}", b, h=h)
        for dd in range(d):
            val += vj[j - 1][dd] * diff_callable(comp, f"x{j}_{dd + 1}", b, h=h)
            val += wj[j - 1][dd] * diff_callable(comp, f"p{j}_{dd + 1}", b, h=h)
        return float(val)

    pairs = {}
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j == k:
                continue
            vals = [apply_dj(j, c) for c in field.v[k - 1]]
            vals += [apply_dj(j, c) for c in field.w[k - 1]]
            pairs[f"{j},{k}"] = max(abs(v) for v in vals)
    return DefectReport(pairs=pairs, max_defect=max(pairs.values(), default=0.0), h=h)


def _field_rhs(field: PhaseVectorField, t: float, x: np.ndarray,
               p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    point = PhasePoint(times=np.full(field.n, t), x=x, p=p)
    b = point.bindings()
    dx = np.stack([field.eval_v(j, b) for j in range(1, field.n + 1)])
    dp = np.stack([field.eval_w(j, b) for j in range(1, field.n + 1)])
    return dx, dp


def evolve_equal_time(field: PhaseVectorField, init: PhasePoint,
                      t_span: tuple[float, float], dt: float,
                      timelike_warning: bool = True) -> NPath:
    """RK4 on the joint system with all time coordinates advanced together
    (lab-frame foliation).  Returns the sampled n-path."""
    if not np.allclose(init.times, init.times[0]):
        raise ValueError("equal-time evolution needs t_1 = ... = t_n initially")
    t0, t1 = t_span
    steps = max(1, int(round((t1 - t0) / dt)))
    dt = (t1 - t0) / steps
    x = init.x.copy()
    p = init.p.copy()
    ts = [t0]
    xs, ps = [x.copy()], [p.copy()]
    dxs, dps = [], []
    k1 = _field_rhs(field, t0, x, p)
    dxs.append(k1[0])
    dps.append(k1[1])
    t = t0
    for _ in range(steps):
        k1 = _field_rhs(field, t, x, p)
        k2 = _field_rhs(field, t + dt / 2, x + dt / 2 * k1[0], p + dt / 2 * k1[1])
        k3 = _field_rhs(field, t + dt / 2, x + dt / 2 * k2[0], p + dt / 2 * k2[1])
        k4 = _field_rhs(field, t + dt, x + dt * k3[0], p + dt * k3[1])
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p = p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t += dt
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise FloatingPointError(f"non-finite state at t = {t}")
        deriv = _field_rhs(field, t, x, p)
        ts.append(t)
        xs.append(x.copy())
        ps.append(p.copy())
        dxs.append(deriv[0])
        dps.append(deriv[1])
    t_arr = np.array(ts)
    lines = []
    for j in range(field.n):
        lines.append(WorldLine(
            t=t_arr,
            x=np.stack([s[j] for s in xs]),
            p=np.stack([s[j] for s in ps]),
            dxdt=np.stack([s[j] for s in dxs]),
            dpdt=np.stack([s[j] for s in dps]),
        ))
    path = NPath(lines)
    if timelike_warning and path.max_speed() >= 1.0:
        warnings.warn(
            f"world line reaches |dx/dt| = {path.max_speed():.3g} >= 1 "
            "(not timelike; Newtonian field assumed)",
            stacklevel=2,
        )
    return path


def validity_residual(field: PhaseVectorField, npath: NPath,
                      samples: Sequence[Sequence[float]]) -> ResidualReport:
    """Check the multi-time equations on the n-path at each time tuple.

    Each sample is lifted onto the path; non-spacelike lifts are rejected
    and counted.  For accepted samples the residual of particle j is
    |dx_j/dt_j - v_j| + |dp_j/dt_j - w_j|, the fields evaluated at the
    lifted multi-time configuration.
    """
    report = ResidualReport()
    for sample in samples:
        times = np.asarray(sample, float)
        if len(times) != field.n:
            raise ValueError("sample tuple length does not match n")
        xs = np.stack([npath.line(j + 1).x_at(times[j]) for j in range(field.n)])
        ps = np.stack([npath.line(j + 1).p_at(times[j]) for j in range(field.n)])
        events = [SpacetimePoint.of(times[j], xs[j]) for j in range(field.n)]
        if not is_spacelike(events):
            report.rows.append({"times": times.tolist(), "spacelike": False})
            report.rejected += 1
            continue
        b = PhasePoint(times=times, x=xs, p=ps).bindings()
        residuals = []
        for j in range(1, field.n + 1):
            line = npath.line(j)
            rx = np.linalg.norm(line.dxdt_at(times[j - 1]) - field.eval_v(j, b))
            rp = np.linalg.norm(line.dpdt_at(times[j - 1]) - field.eval_w(j, b))
            residuals.append(float(rx + rp))
        report.rows.append({
            "times": times.tolist(),
            "spacelike": True,
            "residuals": residuals,
        })
        report.max_residual = max(report.max_residual, max(residuals))
    return report


class HamiltonianPair:
    """Two partial Hamiltonians H_1, H_2 of the two-time full-grid system
    dx_j/dt_k = grad_{p_j} H_k, dp_j/dt_k = -grad_{x_j} H_k."""

    def __init__(self, h_exprs: Sequence[str | Expression], n: int, d: int,
                 h: float | None = None):
        if len(h_exprs) != 2 or n != 2:
            raise ValueError("the full-grid system is implemented for n = 2")
        self.n, self.d, self.h = n, d, h
        self.exprs = [parse_expression(e) if isinstance(e, str) else e
                      for e in h_exprs]
        for e in self.exprs:
            _check_vars(e, n, d)

    def flow(self, k: int, times: np.ndarray, x: np.ndarray,
             p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rate of change of all (x_j, p_j) along time coordinate k."""
        b = PhasePoint(times=times, x=x, p=p).bindings()
        expr = self.exprs[k - 1]
        dx = np.zeros_like(x)
        dp = np.zeros_like(p)
        for j in range(self.n):
            for dd in range(self.d):
                dx[j, dd] = partial_derivative(expr, f"p{j + 1}_{dd + 1}", b, h=self.h)
                dp[j, dd] = -partial_derivative(expr, f"x{j + 1}_{dd + 1}", b, h=self.h)
        return dx, dp


@dataclass
class GridSolution:
    """States x_j(t1,t2), p_j(t1,t2) stored on a rectangular grid."""

    t1: np.ndarray
    t2: np.ndarray
    x: np.ndarray  # (n, N1, N2, d)
    p: np.ndarray


def _rk4_grid_leg(hpair: HamiltonianPair, k: int, times: np.ndarray,
                  x: np.ndarray, p: np.ndarray, duration: float,
                  substeps: int) -> tuple[np.ndarray, np.ndarray]:
    """Advance time coordinate ``k`` by ``duration`` with RK4."""
    dt = duration / substeps
    ax = k - 1
    t = times.copy()
    for _ in range(substeps):
        def rhs(frac_t, xx, pp):
            tt = t.copy()
            tt[ax] = frac_t
            return hpair.flow(k, tt, xx, pp)

        t0 = t[ax]
        k1 = rhs(t0, x, p)
        k2 = rhs(t0 + dt / 2, x + dt / 2 * k1[0], p + dt / 2 * k1[1])
        k3 = rhs(t0 + dt / 2, x + dt / 2 * k2[0], p + dt / 2 * k2[1])
        k4 = rhs(t0 + dt, x + dt * k3[0], p + dt * k3[1])
        x = x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p = p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t[ax] = t0 + dt
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise FloatingPointError("non-finite state on grid leg")
    return x, p


def evolve_full_grid(hpair: HamiltonianPair, init: PhasePoint,
                     t1_grid: Sequence[float], t2_grid: Sequence[float],
                     substeps: int = 4) -> GridSolution:
    """Integrate the two-time grid system: up the first t2 column, then
    along every t1 row (RK4 per leg)."""
    t1_grid = np.asarray(t1_grid, float)
    t2_grid = np.asarray(t2_grid, float)
    n, d = hpair.n, hpair.d
    n1, n2 = len(t1_grid), len(t2_grid)
    xg = np.zeros((n, n1, n2, d))
    pg = np.zeros((n, n1, n2, d))
    x, p = init.x.copy(), init.p.copy()
    column_states = []
    for i2 in range(n2):
        if i2 > 0:
            times = np.array([t1_grid[0], t2_grid[i2 - 1]])
            x, p = _rk4_grid_leg(hpair, 2, times, x, p,
                                 t2_grid[i2] - t2_grid[i2 - 1], substeps)
        column_states.append((x.copy(), p.copy()))
    for i2 in range(n2):
        x, p = column_states[i2]
        for i1 in range(n1):
            if i1 > 0:
                times = np.array([t1_grid[i1 - 1], t2_grid[i2]])
                x, p = _rk4_grid_leg(hpair, 1, times, x, p,
                                     t1_grid[i1] - t1_grid[i1 - 1], substeps)
            xg[:, i1, i2, :] = x
            pg[:, i1, i2, :] = p
    return GridSolution(t1=t1_grid, t2=t2_grid, x=xg, p=pg)


def grid_path_independence(hpair: HamiltonianPair, init: PhasePoint,
                           rectangle: tuple[float, float], dt: float) -> float:
    """Phase-space distance at the far corner between integrating the t1
    leg first and the t2 leg first."""
    dt1, dt2 = rectangle
    if dt1 == 0.0 or dt2 == 0.0:
        return 0.0
    m1 = max(1, int(math.ceil(abs(dt1) / dt)))
    m2 = max(1, int(math.ceil(abs(dt2) / dt)))
    t0 = np.asarray(init.times, float)

    xa, pa = _rk4_grid_leg(hpair, 1, t0.copy(), init.x, init.p, dt1, m1)
    ta = t0.copy()
    ta[0] += dt1
    xa, pa = _rk4_grid_leg(hpair, 2, ta, xa, pa, dt2, m2)

    xb, pb = _rk4_grid_leg(hpair, 2, t0.copy(), init.x, init.p, dt2, m2)
    tb = t0.copy()
    tb[1] += dt2
    xb, pb = _rk4_grid_leg(hpair, 1, tb, xb, pb, dt1, m1)

    return float(np.sqrt(np.sum((xa - xb) ** 2) + np.sum((pa - pb) ** 2)))


def _chord_deviation(npath: NPath) -> float:
    """Max deviation of each world line from its straight chord."""
    worst = 0.0
    for line in npath.lines:
        t0, t1 = line.t[0], line.t[-1]
        frac = ((line.t - t0) / (t1 - t0))[:, None]
        chord = line.x[0][None, :] * (1 - frac) + line.x[-1][None, :] * frac
        worst = max(worst, float(np.max(np.abs(line.x - chord))))
    return worst


def cjs_demo(family: Sequence[tuple[str, PhaseVectorField]],
             sample_points: Sequence[PhasePoint], init: PhasePoint,
             t_span: tuple[float, float], dt: float,
             h: float = 1e-4) -> list[dict]:
    """Consistency-defect sweep plus world-line straightness for each field
    in a candidate family (numerical demonstration of the no-interaction
    theorem, not a proof)."""
    rows = []
    for name, fld in family:
        defects = [classical_consistency_defect(fld, pt, h=h).max_defect
                   for pt in sample_points]
        npath = evolve_equal_time(fld, init, t_span, dt, timelike_warning=False)
        rows.append({
            "id": name,
            "min_defect": float(min(defects)),
            "max_defect": float(max(defects)),
            "straightness_deviation": _chord_deviation(npath),
        })
    return rows
