"""Unsupervised SUSTAIN networks trained on a user's bookmarking history.

Each user gets a vector of per-dimension attention tunings and a growing set
of clusters in topic space. Training walks the user's resources in
chronological order, recruiting a new cluster whenever the best match is too
weak; scoring evaluates a candidate against the trained clusters without
changing them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SustainParams:
    """Attentional focus ``r``, cluster competition ``beta``, learning rate
    ``eta`` and recruitment threshold ``tau``."""

    r: float = 9.998
    beta: float = 6.396
    eta: float = 0.096
    tau: float = 0.5

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be >= 0")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if not 0 < self.eta < 1:
            raise ValueError("eta must be in (0, 1)")
        if not 0 < self.tau < 1:
            raise ValueError("tau must be in (0, 1)")


@dataclass
class UserNetwork:
    lambdas: np.ndarray
    clusters: list[np.ndarray] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.lambdas)

    def copy(self) -> UserNetwork:
        return UserNetwork(self.lambdas.copy(), [c.copy() for c in self.clusters])


@dataclass(frozen=True)
class ActivationResult:
    winner_index: int
    h_act: float
    h_out: float
    mu_winner: np.ndarray


def _check_dims(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def distances(inp, cluster_pos) -> np.ndarray:
    """Per-dimension distance ``|I_i - H_i|`` between an input and a cluster."""
    inp = np.asarray(inp, dtype=np.float64)
    cluster_pos = np.asarray(cluster_pos, dtype=np.float64)
    _check_dims(inp, cluster_pos)
    return np.abs(inp - cluster_pos)


def _attention_weights(lambdas, r):
    # lambda_i^r rescaled by max(lambda)^r; the ratio in the activation is unchanged
    top = lambdas.max()
    if top <= 0:
        raise ValueError("attention tunings must be positive")
    return (lambdas / top) ** r


def cluster_activation(mu, lambdas, r: float) -> float:
    """Attention-weighted mean of ``exp(-lambda_i * mu_i)`` with weights ``lambda_i^r``."""
    mu = np.asarray(mu, dtype=np.float64)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    _check_dims(mu, lambdas)
    w = _attention_weights(lambdas, r)
    # clamp: the weighted mean of values <= 1 may round above 1
    return min(float(np.dot(w, np.exp(-lambdas * mu)) / w.sum()), 1.0)


def winner_output(activations, beta: float) -> tuple[int, float]:
    """Lateral inhibition: the most active cluster's share of ``sum(act^beta)``,
    scaled by its own activation. Ties go to the lowest index."""
    act = np.asarray(activations, dtype=np.float64)
    if act.size == 0:
        raise ValueError("no clusters to compete")
    m = int(np.argmax(act))
    top = act[m]
    if top <= 0:
        return m, 0.0
    # normalized by the winner to keep act^beta in range
    share = 1.0 / np.sum((act / top) ** beta)
    return m, float(share * top)


def update_attention(lambdas, mu_winner, eta: float) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=np.float64)
    mu_winner = np.asarray(mu_winner, dtype=np.float64)
    x = lambdas * mu_winner
    return lambdas + eta * np.exp(-x) * (1.0 - x)


def update_winner_position(cluster_pos, inp, eta: float) -> np.ndarray:
    cluster_pos = np.asarray(cluster_pos, dtype=np.float64)
    inp = np.asarray(inp, dtype=np.float64)
    _check_dims(cluster_pos, inp)
    return cluster_pos + eta * (inp - cluster_pos)


def activate(net: UserNetwork, inp, params: SustainParams) -> ActivationResult:
    """Run the distance, activation and inhibition steps for one input."""
    if not net.clusters:
        raise ValueError("network has no clusters")
    inp = np.asarray(inp, dtype=np.float64)
    _check_dims(inp, net.lambdas)
    pos = np.vstack(net.clusters)
    mu = np.abs(inp[None, :] - pos)
    w = _attention_weights(net.lambdas, params.r)
    acts = np.minimum(np.exp(-net.lambdas[None, :] * mu) @ w / w.sum(), 1.0)
    m, h_out = winner_output(acts, params.beta)
    return ActivationResult(m, float(acts[m]), h_out, mu[m])


def train_user(inputs, params: SustainParams = SustainParams(), seed_first: bool = True,
               trace=None) -> UserNetwork:
    """Train a network on chronologically ordered topic vectors, one pass.

    With ``seed_first`` the first input becomes the first cluster. Otherwise
    training starts from a single cluster at the origin and the first input
    is processed like any other. ``trace(step, net, result, recruited)`` is
    called after each input's recruitment decision, before the updates.
    """
    inputs = [np.asarray(x, dtype=np.float64) for x in inputs]
    if not inputs:
        raise ValueError("no training inputs")
    n = len(inputs[0])
    for x in inputs:
        if x.shape != (n,):
            raise ValueError(f"dimension mismatch: expected {n}, got {x.shape}")

    net = UserNetwork(np.ones(n))
    start = 0
    if seed_first:
        net.clusters.append(inputs[0].copy())
        net.lambdas = update_attention(net.lambdas, np.zeros(n), params.eta)
        start = 1
    else:
        net.clusters.append(np.zeros(n))

    for step in range(start, len(inputs)):
        x = inputs[step]
        res = activate(net, x, params)
        recruited = res.h_out < params.tau
        if recruited:
            net.clusters.append(x.copy())
            res = ActivationResult(len(net.clusters) - 1, 1.0, res.h_out, np.zeros(n))
        if trace is not None:
            trace(step, net, res, recruited)
        net.lambdas = update_attention(net.lambdas, res.mu_winner, params.eta)
        m = res.winner_index
        net.clusters[m] = update_winner_position(net.clusters[m], x, params.eta)
    return net


def score_candidate(net: UserNetwork, inp, params: SustainParams = SustainParams()) -> float:
    """Inhibited output of the winning cluster for ``inp``; never mutates ``net``."""
    return activate(net, inp, params).h_out


def dumps_network(net: UserNetwork) -> str:
    rows = ["lambda\t" + "\t".join(format(v, ".17g") for v in net.lambdas)]
    rows += ["cluster\t" + "\t".join(format(v, ".17g") for v in c) for c in net.clusters]
    return "\n".join(rows)


def write_networks(nets: dict[str, UserNetwork], path) -> None:
    """Dump networks as TSV blocks: a ``user`` header, the tunings, then one row per cluster."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"#sustain-networks\tv{FORMAT_VERSION}\n")
        for user in sorted(nets):
            net = nets[user]
            f.write(f"user\t{user}\t{net.n}\t{len(net.clusters)}\n")
            f.write(dumps_network(net) + "\n")


def read_networks(path) -> dict[str, UserNetwork]:
    nets: dict[str, UserNetwork] = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split("\t")
        if header != ["#sustain-networks", f"v{FORMAT_VERSION}"]:
            raise ValueError(f"{path}: not a v{FORMAT_VERSION} network file")
        user = None
        for lineno, line in enumerate(f, start=2):
            cols = line.rstrip("\n").split("\t")
            kind = cols[0]
            if kind == "user":
                user = cols[1]
                nets[user] = UserNetwork(np.empty(0))
            elif user is None:
                raise ValueError(f"{path}: line {lineno}: data before user header")
            elif kind == "lambda":
                nets[user].lambdas = np.array([float(v) for v in cols[1:]])
            elif kind == "cluster":
                nets[user].clusters.append(np.array([float(v) for v in cols[1:]]))
            elif line.strip():
                raise ValueError(f"{path}: line {lineno}: unknown row type {kind!r}")
    return nets

