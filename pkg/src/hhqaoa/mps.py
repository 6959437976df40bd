"""Matrix-product-state QAOA simulation.

Site tensors have legs ``(left bond, physical, right bond)``; sites follow the
qubit labels of the coupling map and physical index 0 is spin ``z = +1``.

Each phase round applies local gates for the linear terms, then the
multi-site terms as interval MPOs of bond dimension at most 2, grouped so that
gates in one group cover pairwise disjoint site intervals. By default each
cubic term is fused with its two covering edges into one three-site diagonal
gate and the remaining edges stay two-site gates (``bundle="triples"``);
``bundle="none"`` applies every term separately. After every group the state
is compressed back to ``chi_max`` by a right-to-left QR sweep followed by a
left-to-right truncated SVD sweep, and renormalized. Between layers the state
is left-canonical (orthogonality centre on the last site).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np
import scipy.linalg

from .angles import QaoaAngles
from .model import IsingInstance, Term
from .samples import SampleSet

logger = logging.getLogger(__name__)

# singular values below this fraction of the largest are numerical zeros,
# dropped without counting towards the truncation weight
RANK_TOL = 1e-13

Z_DIAG = np.array([1.0, -1.0])


class MpsSimulationError(RuntimeError):
    pass


@dataclass
class MpsState:
    tensors: list[np.ndarray]
    chi_max: int
    truncation_weight: float = 0.0
    canonical_center: int | None = None
    layer_weights: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list[int]:
        """All n+1 bond dimensions including the two trivial boundary bonds."""
        return [self.tensors[0].shape[0]] + [t.shape[2] for t in self.tensors]

    def to_dense(self) -> np.ndarray:
        """Full amplitude vector in the statevector module's index convention."""
        psi = self.tensors[0]
        for t in self.tensors[1:]:
            psi = np.tensordot(psi, t, axes=([psi.ndim - 1], [0]))
        psi = psi.reshape([2] * self.n)
        # axis k is qubit k; the statevector index has qubit 0 least significant
        return np.ascontiguousarray(psi.transpose(list(range(self.n))[::-1])).reshape(-1)

    def norm(self) -> float:
        env = np.ones((1, 1), dtype=complex)
        for a in self.tensors:
            env = _transfer(env, a, None)
        return float(np.sqrt(abs(env[0, 0])))


def mps_from_plus_state(n: int, chi_max: int = 64) -> MpsState:
    if n < 1:
        raise ValueError("need at least one site")
    site = np.full((1, 2, 1), 2 ** -0.5, dtype=np.complex128)
    return MpsState([site.copy() for _ in range(n)], chi_max, canonical_center=n - 1)


def product_state(spins: Sequence[int], chi_max: int = 64) -> MpsState:
    """Computational basis state |z>."""
    tensors = []
    for s in spins:
        t = np.zeros((1, 2, 1), dtype=np.complex128)
        t[0, 0 if s == 1 else 1, 0] = 1.0
        tensors.append(t)
    return MpsState(tensors, chi_max, canonical_center=len(tensors) - 1)


# --- interval MPOs ---------------------------------------------------------

@dataclass(frozen=True)
class IntervalMpo:
    """Operator on sites ``first..last``; tensors have legs (left, out, in, right)."""

    first: int
    last: int
    tensors: tuple[np.ndarray, ...]

    @property
    def max_bond(self) -> int:
        return max(t.shape[3] for t in self.tensors)

    def to_dense(self) -> np.ndarray:
        """Matrix over the span, first site most significant."""
        op = self.tensors[0]
        for t in self.tensors[1:]:
            op = np.tensordot(op, t, axes=([op.ndim - 1], [0]))
        k = len(self.tensors)
        op = op.reshape([2, 2] * k)  # (out1, in1, out2, in2, ...)
        op = op.transpose([2 * i for i in range(k)] + [2 * i + 1 for i in range(k)])
        return op.reshape(2 ** k, 2 ** k)


def _split_operator(diag: np.ndarray, k: int) -> list[np.ndarray]:
    """Factor a diagonal k-site operator into an MPO by successive SVDs."""
    dense = np.diag(diag).reshape([2] * (2 * k))
    # interleave (out_i, in_i) per site
    order = []
    for i in range(k):
        order += [i, k + i]
    rest = dense.transpose(order).reshape(1, -1)
    tensors = []
    for i in range(k - 1):
        left = rest.shape[0]
        mat = rest.reshape(left * 4, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        r = max(1, int(np.sum(s > RANK_TOL * s[0])))
        tensors.append(u[:, :r].reshape(left, 2, 2, r))
        rest = s[:r, None] * vh[:r]
    tensors.append(rest.reshape(rest.shape[0], 2, 2, 1))
    return tensors


def diagonal_mpo(sites: Sequence[int], diag: np.ndarray, n: int | None = None) -> IntervalMpo:
    """MPO for a diagonal operator on ``sites`` (first site most significant in ``diag``).

    The operator on the interacting sites is factored by reshapes and SVDs of
    its dense matrix; sites inside the interval that do not interact carry the
    MPO bond through an identity. Any diagonal operator on at most three sites
    has bond dimension at most 2 across every cut.
    """
    sites = tuple(int(s) for s in sites)
    if list(sites) != sorted(set(sites)) or not 1 <= len(sites) <= 3:
        raise ValueError(f"sites {sites} must be 1 to 3 distinct ascending indices")
    if n is not None and (sites[0] < 0 or sites[-1] >= n):
        raise ValueError(f"sites {sites} exceed the chain of {n} sites")
    core = _split_operator(np.asarray(diag, dtype=complex), len(sites))
    tensors = []
    it = iter(core)
    for site in range(sites[0], sites[-1] + 1):
        if site in sites:
            tensors.append(next(it))
        else:
            bond = tensors[-1].shape[3]
            pad = np.einsum("ab,st->astb", np.eye(bond), np.eye(2)).astype(complex)
            tensors.append(pad)
    return IntervalMpo(sites[0], sites[-1], tuple(tensors))


def _z_product(k: int) -> np.ndarray:
    signs = np.ones(1)
    for _ in range(k):
        signs = np.kron(signs, Z_DIAG)
    return signs


def phase_gate_mpo(sites: Sequence[int], coeff: int, gamma: float, n: int | None = None) -> IntervalMpo:
    """``exp(-i gamma coeff prod_k Z_k)`` over the interval spanned by ``sites``."""
    return diagonal_mpo(sites, np.exp(-1j * gamma * coeff * _z_product(len(sites))), n)


class PhaseGate(NamedTuple):
    """Commuting terms applied together as one diagonal gate on ``sites``."""

    sites: tuple[int, ...]
    terms: tuple[Term, ...]

    def diagonal(self, gamma: float) -> np.ndarray:
        k = len(self.sites)
        # spin of each gate site over the 2**k basis, first site most significant
        bits = (np.arange(2 ** k)[:, None] >> np.arange(k - 1, -1, -1)) & 1
        z = 1 - 2 * bits
        pos = {s: i for i, s in enumerate(self.sites)}
        energy = np.zeros(2 ** k)
        for term in self.terms:
            energy += term.coeff * np.prod(z[:, [pos[s] for s in term.sites]], axis=1)
        return np.exp(-1j * gamma * energy)

    def mpo(self, gamma: float, n: int | None = None) -> IntervalMpo:
        return diagonal_mpo(self.sites, self.diagonal(gamma), n)


def build_gates(instance: IsingInstance, bundle: str = "triples") -> list[PhaseGate]:
    """Multi-site phase gates for one phase layer.

    ``bundle="none"`` gives one gate per quadratic or cubic term. ``"triples"``
    merges every cubic term with the two edges it covers into one three-site
    gate, leaving only the uncovered edges as two-site gates; fewer gates
    means fewer groups and fewer compressions per layer.
    """
    multi = [t for t in instance.terms() if len(t.sites) > 1]
    if bundle == "none":
        return [PhaseGate(t.sites, (t,)) for t in multi]
    if bundle != "triples":
        raise ValueError(f"unknown bundling mode {bundle!r}")
    g = instance.graph
    used: set[tuple[int, int]] = set()
    gates = []
    for w in g.w_set:
        edges = [tuple(sorted((w.l, w.n1))), tuple(sorted((w.l, w.n2)))]
        members = [Term(e, instance.quadratic[e]) for e in edges if e not in used]
        used.update(edges)
        members.append(Term(tuple(sorted(w)), instance.cubic[w]))
        gates.append(PhaseGate(tuple(sorted(w)), tuple(members)))
    for e in g.edges:
        if e not in used:
            gates.append(PhaseGate(e, (Term(e, instance.quadratic[e]),)))
    return gates


Gate = Union[Term, PhaseGate]


def _as_gate(item: Gate) -> PhaseGate:
    return item if isinstance(item, PhaseGate) else PhaseGate(item.sites, (item,))


def group_gates(gates: Iterable[Gate]) -> list[list[Gate]]:
    """First-fit grouping so that every group's site intervals are pairwise disjoint.

    Accepts terms or bundled gates (anything with ascending ``sites``). Items
    are visited by ascending interval start, which makes first-fit use the
    minimum possible number of groups.
    """
    ordered = sorted(gates, key=lambda t: (t.sites[0], t.sites[-1], t.sites))
    groups: list[list[Gate]] = []
    ends: list[int] = []  # rightmost occupied site per group
    for term in ordered:
        lo, hi = term.sites[0], term.sites[-1]
        for gi, end in enumerate(ends):
            if lo > end:
                groups[gi].append(term)
                ends[gi] = hi
                break
        else:
            groups.append([term])
            ends.append(hi)
    return groups


# --- core tensor operations -------------------------------------------------

def _apply_mpo_site(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    dl, _, dr = a.shape
    wl, _, _, wr = w.shape
    out = np.einsum("xstz,ltr->lxsrz", w, a)
    return out.reshape(dl * wl, 2, dr * wr)


def _apply_local(a: np.ndarray, op: np.ndarray) -> np.ndarray:
    return np.einsum("st,ltr->lsr", op, a)


def _svd(mat: np.ndarray, site: int):
    try:
        return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        try:
            return scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise MpsSimulationError(f"SVD failed at site {site}: {exc}") from exc


def _right_orthogonalize(tensors: list[np.ndarray], stop: int) -> None:
    """QR sweep from the last site down to ``stop + 1``; site ``stop`` absorbs the rest."""
    for i in range(len(tensors) - 1, stop, -1):
        a = tensors[i]
        dl, _, dr = a.shape
        q, r = scipy.linalg.qr(a.reshape(dl, 2 * dr).T, mode="economic", check_finite=False)
        k = q.shape[1]
        tensors[i] = q.T.reshape(k, 2, dr)
        tensors[i - 1] = np.tensordot(tensors[i - 1], r.T, axes=([2], [0]))


def _left_truncate(tensors: list[np.ndarray], start: int, chi_max: int) -> float:
    """Truncated SVD sweep from ``start`` to the end; returns the discarded weight."""
    discarded = 0.0
    for i in range(start, len(tensors) - 1):
        a = tensors[i]
        dl, _, dr = a.shape
        u, s, vh = _svd(a.reshape(dl * 2, dr), i)
        total = float(np.dot(s, s))
        if total == 0.0:
            raise MpsSimulationError(f"zero tensor at site {i}")
        keep = int(np.sum(s > RANK_TOL * s[0]))
        if keep > chi_max:
            discarded += float(np.dot(s[chi_max:keep], s[chi_max:keep])) / total
            keep = chi_max
        tensors[i] = u[:, :keep].reshape(dl, 2, keep)
        tensors[i + 1] = np.tensordot(s[:keep, None] * vh[:keep], tensors[i + 1], axes=([1], [0]))
    return discarded


def canonicalize(mps: MpsState, start: int = 0) -> MpsState:
    """Left-canonical form with centre on the last site, compressed to ``chi_max``."""
    tensors = list(mps.tensors)
    _right_orthogonalize(tensors, start)
    weight = _left_truncate(tensors, start, mps.chi_max)
    last = tensors[-1]
    nrm = np.linalg.norm(last)
    tensors[-1] = last / nrm
    return replace(
        mps,
        tensors=tensors,
        truncation_weight=mps.truncation_weight + weight,
        canonical_center=len(tensors) - 1,
        layer_weights=mps.layer_weights + [weight],
    )


def apply_mpo(mps: MpsState, mpo: IntervalMpo) -> MpsState:
    """Exact MPO application; no compression."""
    tensors = list(mps.tensors)
    for offset, w in enumerate(mpo.tensors):
        site = mpo.first + offset
        tensors[site] = _apply_mpo_site(tensors[site], w)
    return replace(mps, tensors=tensors, canonical_center=None)


def apply_group_and_compress(mps: MpsState, group: Sequence[Gate], gamma: float) -> MpsState:
    """Apply every gate of a disjoint group exactly, then compress and renormalize."""
    if not group:
        return mps
    tensors = list(mps.tensors)
    touched = min(t.sites[0] for t in group)
    for gate in group:
        mpo = _as_gate(gate).mpo(gamma, mps.n)
        for offset, w in enumerate(mpo.tensors):
            site = mpo.first + offset
            tensors[site] = _apply_mpo_site(tensors[site], w)
    if mps.canonical_center != mps.n - 1:
        touched = 0
    # sites left of ``touched`` are still left-isometries
    return canonicalize(replace(mps, tensors=tensors), start=touched)


def apply_local_phases(mps: MpsState, terms: Iterable[Term], gamma: float) -> MpsState:
    """Single-site diagonal gates; bond dimensions and canonical form unchanged."""
    tensors = list(mps.tensors)
    for term in terms:
        (site,) = term.sites
        phase = np.exp(-1j * gamma * term.coeff * Z_DIAG)
        tensors[site] = tensors[site] * phase[None, :, None]
    return replace(mps, tensors=tensors)


def rx_matrix(beta: float) -> np.ndarray:
    """exp(-i beta X), i.e. RX(2 beta)."""
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -1j * s], [-1j * s, c]])


def apply_mixer(mps: MpsState, beta: float) -> MpsState:
    op = rx_matrix(beta)
    return replace(mps, tensors=[_apply_local(a, op) for a in mps.tensors])


def phase_layer(
    mps: MpsState, instance: IsingInstance, gamma: float, groups=None, bundle: str = "triples"
) -> MpsState:
    terms = instance.terms()
    mps = apply_local_phases(mps, [t for t in terms if len(t.sites) == 1], gamma)
    if groups is None:
        groups = group_gates(build_gates(instance, bundle))
    for group in groups:
        mps = apply_group_and_compress(mps, group, gamma)
    return mps


def run_qaoa_mps(
    instance: IsingInstance, angles: QaoaAngles, chi_max: int, bundle: str = "triples"
) -> MpsState:
    if angles.p < 1:
        raise ValueError("MPS simulation needs p >= 1")
    groups = group_gates(build_gates(instance, bundle))
    mps = mps_from_plus_state(instance.n, chi_max)
    for k, (beta, gamma) in enumerate(zip(angles.beta, angles.gamma)):
        mps = phase_layer(mps, instance, gamma, groups)
        mps = apply_mixer(mps, beta)
        logger.debug("round %d: bonds max %d, weight %.3e", k + 1, max(mps.bond_dims()), mps.truncation_weight)
    return mps


# --- contractions -----------------------------------------------------------

def _transfer(env: np.ndarray, a: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
    """env'[b, b'] = sum_{a, a', s} conj(A[a, s, b]) env[a, a'] w_s A[a', s, b']."""
    dl, _, dr = a.shape
    t = (env @ a.reshape(dl, 2 * dr)).reshape(dl, 2, dr)
    if weights is not None:
        t = t * weights[None, :, None]
    return a.conj().reshape(dl * 2, dr).T @ t.reshape(dl * 2, dr)


def _right_envs_iter(tensors: list[np.ndarray]):
    """Yield (k, R_k) for k = n .. 0, where R_k contracts sites k..n-1 with themselves."""
    env = np.ones((1, 1), dtype=complex)
    n = len(tensors)
    yield n, env
    for k in range(n - 1, -1, -1):
        a = tensors[k]
        dl, _, dr = a.shape
        x = (a.reshape(dl * 2, dr) @ env.T).reshape(dl, 2 * dr)
        env = a.conj().reshape(dl, 2 * dr) @ x.T
        yield k, env


def mps_expectation(mps: MpsState, instance: IsingInstance) -> float:
    """<psi|H_C|psi> by transfer-matrix contraction of every term."""
    if mps.canonical_center != mps.n - 1:
        mps = canonicalize(replace(mps, chi_max=max(mps.bond_dims()) * 2))
    tensors = mps.tensors
    by_end: dict[int, list[Term]] = {}
    for term in instance.terms():
        by_end.setdefault(term.sites[-1], []).append(term)
    total = 0.0
    for k, env_r in _right_envs_iter(tensors):
        # env_r = R_k; terms ending at k-1 close against it
        for term in by_end.get(k - 1, ()):
            first = term.sites[0]
            dl = tensors[first].shape[0]
            env = np.eye(dl, dtype=complex)  # left-canonical: identity left environment
            for site in range(first, k):
                env = _transfer(env, tensors[site], Z_DIAG if site in term.sites else None)
            total += term.coeff * float(np.sum(env * env_r).real)
    return total


def right_canonical(mps: MpsState) -> list[np.ndarray]:
    tensors = list(mps.tensors)
    _right_orthogonalize(tensors, 0)
    tensors[0] = tensors[0] / np.linalg.norm(tensors[0])
    return tensors


def mps_sample(mps: MpsState, shots: int, seed: int, instance: IsingInstance, batch: int = 8192) -> SampleSet:
    """Perfect sampling: one conditional single-site draw per site, left to right."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    tensors = right_canonical(mps)
    rng = np.random.default_rng(seed)
    n = mps.n
    out = np.empty((shots, n), dtype=np.int8)
    for lo in range(0, shots, batch):
        m = min(batch, shots - lo)
        v = np.ones((m, 1), dtype=complex)
        u = rng.random((m, n))
        for k, a in enumerate(tensors):
            w0 = v @ a[:, 0, :]
            w1 = v @ a[:, 1, :]
            p0 = np.einsum("ij,ij->i", w0.conj(), w0).real
            p1 = np.einsum("ij,ij->i", w1.conj(), w1).real
            pick1 = u[:, k] * (p0 + p1) >= p0
            out[lo:lo + m, k] = np.where(pick1, -1, 1)
            nxt = np.where(pick1[:, None], w1, w0)
            nrm = np.sqrt(np.where(pick1, p1, p0))
            v = nxt / nrm[:, None]
    return SampleSet.from_spins(instance, out)


def bond_dimension_error_scan(
    instance: IsingInstance, angles: QaoaAngles, chi_list: Sequence[int], chi_ref: int
) -> list[dict]:
    """|E_chi - E_ref| for every chi in ``chi_list`` against a reference run at ``chi_ref``."""
    if chi_ref < max(chi_list):
        raise ValueError("chi_ref must be at least the largest scanned chi")
    ref = run_qaoa_mps(instance, angles, chi_ref)
    e_ref = mps_expectation(ref, instance)
    rows = []
    for chi in chi_list:
        if chi == chi_ref:
            state, e = ref, e_ref
        else:
            state = run_qaoa_mps(instance, angles, chi)
            e = mps_expectation(state, instance)
        rows.append(
            {
                "chi": int(chi),
                "energy": e,
                "delta_e": abs(e - e_ref),
                "truncation_weight": state.truncation_weight,
                "reference_energy": e_ref,
            }
        )
    return rows
