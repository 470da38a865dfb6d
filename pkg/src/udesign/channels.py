"""Quantum channels, their bipartite output states and process matrices.

A channel acts on the first factor of C^d ⊗ C^d; feeding in the maximally
entangled state |I><I| yields the bipartite output state that determines the
channel completely.  The process matrix is the channel's superoperator matrix
in the standard |j><k| basis and equals d times that output state, so channel
distances reduce to state distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NotChannelImageError
from .linalg import ATOL_ALG, dag, haar_unitary, partial_trace, unvec, vec


@dataclass(frozen=True)
class QuantumChannel:
    """Completely positive trace-preserving map in Kraus form."""

    dim: int
    kraus: np.ndarray          # (k, d, d)
    unital: bool = field(default=False)

    @classmethod
    def from_kraus(cls, ops, atol: float = ATOL_ALG) -> "QuantumChannel":
        kraus = np.asarray(ops, dtype=complex)
        if kraus.ndim != 3 or kraus.shape[1] != kraus.shape[2]:
            raise InvalidInputError(f"Kraus stack must have shape (k, d, d), got {kraus.shape}")
        d = kraus.shape[1]
        ident = np.eye(d)
        tp_residual = np.linalg.norm(np.einsum('kba,kbc->ac', kraus.conj(), kraus) - ident)
        if tp_residual > atol:
            raise InvalidInputError(f"Kraus operators are not trace preserving: residual {tp_residual:.3e}")
        unital_residual = np.linalg.norm(np.einsum('kab,kcb->ac', kraus, kraus.conj()) - ident)
        kraus.setflags(write=False)
        return cls(dim=d, kraus=kraus, unital=bool(unital_residual <= atol))

    def apply(self, a: np.ndarray) -> np.ndarray:
        """Ordinary action sum_k B_k A B_k†."""
        return np.einsum('kab,bc,kdc->ad', self.kraus, np.asarray(a, dtype=complex), self.kraus.conj())

    def __len__(self) -> int:
        return self.kraus.shape[0]


@dataclass(frozen=True)
class ChannelEstimate:
    """Linear (generally unphysical) channel estimate held as a process matrix.

    Positivity is deliberately not enforced; `min_choi_eigenvalue` reports how
    far the underlying bipartite state is from positive semidefinite.
    """

    dim: int
    process: np.ndarray        # (d², d²)
    linear_estimate: bool = True

    def apply(self, a: np.ndarray) -> np.ndarray:
        return apply_process_matrix(self.process, np.asarray(a, dtype=complex), self.dim)

    def jamiolkowski_state(self) -> np.ndarray:
        return self.process / self.dim

    def min_choi_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.jamiolkowski_state()).min())


def jamiolkowski(channel: QuantumChannel) -> np.ndarray:
    """Bipartite output state (E ⊗ Id)(|I><I|) on C^d ⊗ C^d."""
    d = channel.dim
    # (B ⊗ I)|I> = vec(B)/sqrt(d) under the row-major vec convention
    vecs = channel.kraus.reshape(len(channel), -1) / np.sqrt(d)
    return np.einsum('ki,kj->ij', vecs, vecs.conj())


def process_matrix(channel: QuantumChannel | ChannelEstimate) -> np.ndarray:
    """Superoperator matrix in the standard |j><k| basis (= d × output state)."""
    if isinstance(channel, ChannelEstimate):
        return channel.process
    flat = channel.kraus.reshape(len(channel), -1)
    return np.einsum('ki,kj->ij', flat, flat.conj())


def apply_process_matrix(s: np.ndarray, a: np.ndarray, d: int) -> np.ndarray:
    """Ordinary action sum_jk s_jk E_j A E_k† recovered from the matrix s."""
    s4 = np.asarray(s).reshape(d, d, d, d)
    return np.einsum('abcd,bd->ac', s4, np.asarray(a, dtype=complex))


def leftright_apply(s: np.ndarray, a: np.ndarray, d: int) -> np.ndarray:
    """Left-right action of the same matrix: A -> unvec(s · vec(A))."""
    return unvec(np.asarray(s) @ vec(np.asarray(a, dtype=complex)), d)


def inverse_jamiolkowski(rho: np.ndarray, atol: float = ATOL_ALG) -> QuantumChannel:
    """Channel whose output state is ``rho``, from the process matrix d·rho.

    Requires tr_s(rho) = I/d (every trace-preserving image satisfies it) and
    complete positivity within tolerance, since Kraus operators are read off
    the eigendecomposition of the process matrix.
    """
    rho = np.asarray(rho, dtype=complex)
    d2 = rho.shape[0]
    d = int(round(np.sqrt(d2)))
    if d * d != d2 or rho.shape != (d2, d2):
        raise InvalidInputError(f"expected a (d², d²) bipartite state, got shape {rho.shape}")
    marg = partial_trace(rho, (d, d), axis=0)
    residual = float(np.linalg.norm(marg - np.eye(d) / d))
    if residual > atol:
        raise NotChannelImageError(residual)
    s = d * rho
    evals, evecs = np.linalg.eigh((s + dag(s)) / 2)
    if evals.min() < -1e-8:
        raise InvalidInputError(
            f"state is not completely positive within tolerance (min eigenvalue {evals.min():.3e})"
        )
    keep = evals > 0
    kraus = [np.sqrt(lam) * unvec(evecs[:, i], d) for i, lam in zip(np.where(keep)[0], evals[keep])]
    return QuantumChannel.from_kraus(kraus, atol=max(atol, 1e-7))


def channel_distance(a: QuantumChannel | ChannelEstimate, b: QuantumChannel | ChannelEstimate) -> float:
    """Frobenius distance between channels, normalized to equal the distance
    between their bipartite output states."""
    if a.dim != b.dim:
        raise InvalidInputError("channel dimensions differ")
    return float(np.linalg.norm(process_matrix(a) - process_matrix(b))) / a.dim


def rotate_channel(channel: QuantumChannel, u_sys: np.ndarray, u_anc: np.ndarray) -> QuantumChannel:
    """Channel whose output state is (U_s ⊗ U_a) rho (U_s ⊗ U_a)†.

    Realized on Kraus operators as B -> U_s B U_a^T; preserves unitality.
    """
    kraus = np.einsum('ab,kbc,dc->kad', u_sys, channel.kraus, u_anc)
    return QuantumChannel.from_kraus(kraus)


def _weyl_basis(d: int) -> np.ndarray:
    """Shift-clock unitary operator basis, tr(W†W') = d delta."""
    shift = np.roll(np.eye(d), 1, axis=0).astype(complex)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ops = []
    for a in range(d):
        for b in range(d):
            ops.append(np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return np.array(ops)


def depolarizing_channel(p: float, d: int) -> QuantumChannel:
    """A -> p·A + (1-p)·tr(A)·I/d, Kraus form over the shift-clock basis."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"depolarizing parameter must lie in [0, 1], got {p}")
    basis = _weyl_basis(d)
    coeff = np.full(d * d, np.sqrt((1 - p) / d ** 2))
    coeff[0] = np.sqrt(p + (1 - p) / d ** 2)
    return QuantumChannel.from_kraus(coeff[:, None, None] * basis)


def random_unital_mix(k: int, d: int, rng: np.random.Generator) -> QuantumChannel:
    """Probabilistic mixture of k Haar unitaries with flat-Dirichlet weights."""
    if k < 1:
        raise InvalidInputError(f"need at least one unitary, got k={k}")
    probs = rng.dirichlet(np.ones(k))
    kraus = [np.sqrt(r) * haar_unitary(d, rng) for r in probs]
    return QuantumChannel.from_kraus(kraus)


def random_general_channel(k: int, d: int, rng: np.random.Generator) -> QuantumChannel:
    """k Gaussian Kraus operators, polar-normalized so sum B†B = I."""
    if k < 1:
        raise InvalidInputError(f"need at least one Kraus operator, got k={k}")
    raw = rng.standard_normal((k, d, d)) + 1j * rng.standard_normal((k, d, d))
    gram = np.einsum('kba,kbc->ac', raw.conj(), raw)
    evals, evecs = np.linalg.eigh(gram)
    inv_sqrt = (evecs / np.sqrt(evals)) @ dag(evecs)
    return QuantumChannel.from_kraus(raw @ inv_sqrt)


def channel_gallery(name: str, d: int, rng: np.random.Generator | None = None,
                    param=None) -> QuantumChannel:
    """Named channel constructions used by the simulator and the CLI.

    name ∈ {identity, fixed_unitary, random_unitary, random_unital_mix,
    depolarizing, random_general}; `param` carries U, k or p where needed.
    """
    if name == 'identity':
        return QuantumChannel.from_kraus([np.eye(d, dtype=complex)])
    if name == 'fixed_unitary':
        if param is None:
            raise InvalidInputError("fixed_unitary needs the unitary as parameter")
        return QuantumChannel.from_kraus([np.asarray(param, dtype=complex)])
    if name == 'depolarizing':
        if param is None:
            raise InvalidInputError("depolarizing needs a parameter p in [0, 1]")
        return depolarizing_channel(float(param), d)
    if rng is None:
        raise InvalidInputError(f"channel {name!r} is random and needs an rng")
    if name == 'random_unitary':
        return QuantumChannel.from_kraus([haar_unitary(d, rng)])
    if name == 'random_unital_mix':
        return random_unital_mix(int(param if param is not None else 3), d, rng)
    if name == 'random_general':
        return random_general_channel(int(param if param is not None else 2), d, rng)
    raise InvalidInputError(f"unknown channel name {name!r}")


def channel_from_spec(spec: str, d: int, rng: np.random.Generator | None = None) -> QuantumChannel:
    """Parse the CLI channel grammar `name` or `name:param`."""
    name, _, raw = spec.partition(':')
    param = None
    if raw:
        try:
            param = float(raw) if name == 'depolarizing' else int(raw)
        except ValueError as exc:
            raise InvalidInputError(f"bad channel parameter {raw!r} in {spec!r}") from exc
    return channel_gallery(name, d, rng=rng, param=param)
