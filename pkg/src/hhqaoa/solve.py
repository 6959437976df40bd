"""Classical reference solutions: exact extrema, cubic-to-quadratic reduction, local search."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .model import EnergyBounds, IsingInstance, WEntry
from .samples import spins_from_indices

DEFAULT_ENUMERATION_CAP = 28


def brute_force_extrema(instance: IsingInstance, cap: int = DEFAULT_ENUMERATION_CAP) -> EnergyBounds:
    """Exact minimum and maximum by Gray-code enumeration of all 2**n spin vectors."""
    if instance.n > cap:
        raise ValueError(f"{instance.n} spins exceeds the enumeration cap of {cap}")
    ptr, idx, coeff = _kernels.term_incidence(instance)
    lo, arg_lo, hi, _ = _kernels.gray_extrema(instance.n, ptr, idx, coeff)
    argmin = tuple(int(s) for s in spins_from_indices([arg_lo], instance.n)[0])
    return EnergyBounds(int(lo), int(hi), argmin, exact=True)


# --- order reduction ----------------------------------------------------------

def _aux_name(w: WEntry) -> str:
    return f"y{w.l}_{w.n1}_{w.n2}"


@dataclass
class QuadraticBinaryModel:
    """``offset + sum_v a_v x_v + sum_(u,v) b_uv x_u x_v`` over binary variables."""

    variables: list[str]
    offset: int = 0
    linear: dict[str, int] = field(default_factory=dict)
    quadratic: dict[tuple[str, str], int] = field(default_factory=dict)
    penalty: int = 0

    def add_linear(self, v: str, c: int) -> None:
        self.linear[v] = self.linear.get(v, 0) + c

    def add_quadratic(self, u: str, v: str, c: int) -> None:
        if u == v:  # x^2 = x for binaries
            self.add_linear(u, c)
            return
        key = (u, v) if self.variables.index(u) < self.variables.index(v) else (v, u)
        self.quadratic[key] = self.quadratic.get(key, 0) + c

    def prune(self) -> None:
        self.linear = {k: c for k, c in self.linear.items() if c != 0}
        self.quadratic = {k: c for k, c in self.quadratic.items() if c != 0}

    def energy(self, assignment) -> int:
        """Objective for a mapping name -> {0, 1} (or a sequence in variable order)."""
        if not isinstance(assignment, dict):
            assignment = dict(zip(self.variables, assignment))
        total = self.offset
        for v, c in self.linear.items():
            total += c * assignment[v]
        for (u, v), c in self.quadratic.items():
            total += c * assignment[u] * assignment[v]
        return int(total)

    def energies(self, x: np.ndarray) -> np.ndarray:
        """Vectorized objective over rows of a ``(m, len(variables))`` 0/1 array."""
        pos = {v: i for i, v in enumerate(self.variables)}
        x = np.asarray(x, dtype=np.int64)
        out = np.full(x.shape[0], self.offset, dtype=np.int64)
        for v, c in self.linear.items():
            out += c * x[:, pos[v]]
        for (u, v), c in self.quadratic.items():
            out += c * x[:, pos[u]] * x[:, pos[v]]
        return out


def auto_penalty(instance: IsingInstance) -> int:
    return 1 + sum(abs(c) for _, c in instance.terms())


def reduce_order(instance: IsingInstance, penalty: int | str = "auto") -> QuadraticBinaryModel:
    """Quadratic binary model with the same minimum as the cubic Ising instance.

    Spins map to binaries by ``x = (1 - z) / 2``. Each cubic term
    ``d z_l z_a z_b`` gets an auxiliary ``y = x_a x_b`` enforced by the
    Rosenberg penalty ``P (x_a x_b - 2 x_a y - 2 x_b y + 3 y)``, which is 0 when
    ``y = x_a x_b`` and at least ``P`` otherwise. Any penalty above 4 keeps the
    minimum; the automatic value is ``1 + sum |coefficients|``.
    """
    if penalty == "auto":
        penalty = auto_penalty(instance)
    penalty = int(penalty)
    if penalty <= 0:
        raise ValueError("penalty must be a positive integer")
    g = instance.graph
    xs = [f"x{v}" for v in g.nodes]
    model = QuadraticBinaryModel(xs + [_aux_name(w) for w in g.w_set], penalty=penalty)

    for v in g.nodes:  # d (1 - 2x)
        d = instance.linear[v]
        model.offset += d
        model.add_linear(xs[v], -2 * d)
    for i, j in g.edges:  # d (1 - 2x_i)(1 - 2x_j)
        d = instance.quadratic[(i, j)]
        model.offset += d
        model.add_linear(xs[i], -2 * d)
        model.add_linear(xs[j], -2 * d)
        model.add_quadratic(xs[i], xs[j], 4 * d)
    for w in g.w_set:
        d = instance.cubic[w]
        xl, xa, xb, y = xs[w.l], xs[w.n1], xs[w.n2], _aux_name(w)
        # d (1 - 2x_l)(1 - 2x_a - 2x_b + 4y)
        model.offset += d
        model.add_linear(xl, -2 * d)
        model.add_linear(xa, -2 * d)
        model.add_linear(xb, -2 * d)
        model.add_linear(y, 4 * d)
        model.add_quadratic(xl, xa, 4 * d)
        model.add_quadratic(xl, xb, 4 * d)
        model.add_quadratic(xl, y, -8 * d)
        model.add_quadratic(xa, xb, penalty)
        model.add_quadratic(xa, y, -2 * penalty)
        model.add_quadratic(xb, y, -2 * penalty)
        model.add_linear(y, 3 * penalty)
    model.prune()
    return model


def model_minimum(model: QuadraticBinaryModel, chunk: int = 1 << 16) -> int:
    """Exhaustive minimum over all assignments (small models only)."""
    m = len(model.variables)
    if m > 26:
        raise ValueError("too many variables to enumerate")
    best = None
    for lo in range(0, 1 << m, chunk):
        idx = np.arange(lo, min(lo + chunk, 1 << m), dtype=np.int64)
        x = (idx[:, None] >> np.arange(m)) & 1
        e = int(model.energies(x).min())
        best = e if best is None else min(best, e)
    return best if best is not None else model.offset


# --- LP export ----------------------------------------------------------------

def _fmt_terms(items) -> str:
    parts = []
    for c, name in items:
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {abs(c)} {name}")
    return " ".join(parts)


def export_quadratic_model(model: QuadraticBinaryModel, path) -> None:
    """Write the model in CPLEX LP format.

    The constant offset is carried in a ``\\ offset:`` comment line, since the
    objective section takes no constant. Quadratic coefficients are written
    doubled inside ``[ ... ] / 2`` as the format requires.
    """
    lines = [
        "\\ quadratic binary model from cubic order reduction",
        f"\\ offset: {model.offset}",
        f"\\ penalty: {model.penalty}",
        "Minimize",
    ]
    lin = [(model.linear[v], v) for v in model.variables if v in model.linear]
    quad = [(2 * c, f"{u} * {v}") for (u, v), c in model.quadratic.items()]
    obj = " obj:"
    if lin:
        obj += " " + _fmt_terms(lin)
    if quad:
        obj += " + [ " + _fmt_terms(quad) + " ] / 2"
    if not lin and not quad:
        obj += " 0"
    lines.append(obj)
    lines.append("Subject To")
    lines.append("Binaries")
    if model.variables:
        lines.append(" " + " ".join(model.variables))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")


_TERM = re.compile(r"([+-])\s*(\d+)\s+([A-Za-z_][\w]*)(?:\s*\*\s*([A-Za-z_][\w]*))?")


def parse_lp(path) -> QuadraticBinaryModel:
    """Read back a file written by :func:`export_quadratic_model`."""
    text = Path(path).read_text()
    offset = 0
    penalty = 0
    objective = ""
    variables: list[str] = []
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("\\"):
            if line.startswith("\\ offset:"):
                offset = int(line.split(":", 1)[1])
            elif line.startswith("\\ penalty:"):
                penalty = int(line.split(":", 1)[1])
            continue
        lowered = line.lower()
        if lowered in ("minimize", "subject to", "binaries", "end"):
            section = lowered
            continue
        if section == "minimize":
            objective += " " + line.split(":", 1)[-1]
        elif section == "binaries":
            variables.extend(line.split())
    model = QuadraticBinaryModel(variables, offset=offset, penalty=penalty)
    if "[" in objective:
        lin_part, rest = objective.split("[", 1)
        quad_part = rest.split("]", 1)[0]
    else:
        lin_part, quad_part = objective, ""
    for sign, c, u, v in _TERM.findall(lin_part):
        model.add_linear(u, int(c) * (-1 if sign == "-" else 1))
    for sign, c, u, v in _TERM.findall(quad_part):
        coeff = int(c) * (-1 if sign == "-" else 1)
        if coeff % 2:
            raise ValueError(f"odd doubled quadratic coefficient for {u} * {v}")
        model.add_quadratic(u, v, coeff // 2)
    model.prune()
    return model


# --- heuristic bounds -----------------------------------------------------------

def _descend(z, ptr, idx, term_vals) -> None:
    """Steepest single-spin-flip descent in place."""
    n = len(z)
    site_of = np.repeat(np.arange(n), np.diff(ptr))
    while True:
        field_sum = np.bincount(site_of, weights=term_vals[idx], minlength=n)
        delta = -2.0 * field_sum  # energy change of flipping each spin
        k = int(np.argmin(delta))
        if delta[k] >= 0:
            return
        z[k] = -z[k]
        touched = idx[ptr[k]:ptr[k + 1]]
        term_vals[touched] = -term_vals[touched]


def _local_min(instance: IsingInstance, restarts: int, rng: np.random.Generator):
    terms = instance.terms()
    ptr, idx, coeff = _kernels.term_incidence(instance)
    best_e, best_z = None, None
    for _ in range(restarts):
        z = rng.choice(np.array([-1, 1]), size=instance.n)
        vals = np.array([c * np.prod(z[list(s)]) for s, c in terms], dtype=float)
        _descend(z, ptr, idx, vals)
        e = int(vals.sum())
        if best_e is None or e < best_e:
            best_e, best_z = e, z.copy()
    return best_e, best_z


def local_search_bound(instance: IsingInstance, restarts: int = 100, seed: int = 0) -> EnergyBounds:
    """Best-of-restarts steepest descent for the minimum, and on the negated instance for the maximum.

    The minimum is an upper bound on the ground energy and the maximum a lower
    bound on the top of the spectrum; never exact.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    lo, z = _local_min(instance, restarts, rng)
    neg_lo, _ = _local_min(instance.negated(), restarts, rng)
    return EnergyBounds(lo, -neg_lo, tuple(int(s) for s in z), exact=False)
