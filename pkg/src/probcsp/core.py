"""Binary constraint networks, support counts, removal profiles and an AC-3 baseline.

Domain values are arbitrary integers; internally every variable gets dense
0-based value indices and every constraint is stored as a boolean support
matrix, materialised in both directions.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "NetworkError",
    "ConstraintNetwork",
    "SupportCounts",
    "RemovalProfile",
    "load_network",
    "read_network",
    "network_to_document",
    "support_counts",
    "load_profile",
    "read_profile",
    "ac3",
    "AC3Result",
]


class NetworkError(ValueError):
    """Invalid network or removal-profile document."""


def _is_int(x: Any) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ConstraintNetwork:
    """Immutable binary constraint network.

    ``relations[(i, j)]`` is a ``(|D_i|, |D_j|)`` boolean matrix; both
    ``(i, j)`` and ``(j, i)`` are present for every constraint.
    """

    names: tuple[str, ...]
    domains: tuple[tuple[int, ...], ...]
    relations: Mapping[tuple[int, int], np.ndarray]
    neighbors: tuple[tuple[int, ...], ...]
    counts: "SupportCounts" = field(init=False, repr=False)
    _name_index: dict = field(init=False, repr=False)
    _value_index: tuple = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_name_index", {nm: i for i, nm in enumerate(self.names)})
        object.__setattr__(
            self, "_value_index", tuple({v: t for t, v in enumerate(dom)} for dom in self.domains)
        )
        object.__setattr__(self, "counts", SupportCounts._from_network(self))

    @classmethod
    def build(
        cls,
        names: Sequence[str],
        domains: Sequence[Sequence[int]],
        constraints: Iterable[tuple[tuple[str, str], Iterable[tuple[int, int]]]],
    ) -> "ConstraintNetwork":
        """Validate and assemble a network from per-variable domains and extensional supports."""
        names = tuple(str(nm) for nm in names)
        if len(set(names)) != len(names):
            raise NetworkError("duplicate variable name")
        if len(domains) != len(names):
            raise NetworkError("one domain per variable required")
        doms = []
        for nm, dom in zip(names, domains):
            dom = tuple(dom)
            if not dom:
                raise NetworkError(f"variable {nm!r}: empty domain")
            if not all(_is_int(v) for v in dom):
                raise NetworkError(f"variable {nm!r}: domain values must be integers")
            dom = tuple(int(v) for v in dom)
            if len(set(dom)) != len(dom):
                raise NetworkError(f"variable {nm!r}: duplicate domain value")
            doms.append(dom)
        index = {nm: i for i, nm in enumerate(names)}
        vindex = [{v: t for t, v in enumerate(dom)} for dom in doms]

        relations: dict[tuple[int, int], np.ndarray] = {}
        adj: list[set[int]] = [set() for _ in names]
        for c, (scope, supports) in enumerate(constraints):
            where = f"constraint #{c}"
            if len(scope) != 2:
                raise NetworkError(f"{where}: scope must name exactly two variables")
            a, b = scope
            for nm in (a, b):
                if nm not in index:
                    raise NetworkError(f"{where}: unknown variable {nm!r}")
            i, j = index[a], index[b]
            if i == j:
                raise NetworkError(f"{where}: self-loop on {a!r}")
            if (i, j) in relations:
                raise NetworkError(f"{where}: duplicate constraint on pair ({a!r}, {b!r})")
            rel = np.zeros((len(doms[i]), len(doms[j])), dtype=bool)
            for s, tup in enumerate(supports):
                if len(tup) != 2 or not all(_is_int(v) for v in tup):
                    raise NetworkError(f"{where}, support #{s}: expected a pair of integers")
                u, v = int(tup[0]), int(tup[1])
                if u not in vindex[i]:
                    raise NetworkError(f"{where}, support #{s}: value {u} not in domain of {a!r}")
                if v not in vindex[j]:
                    raise NetworkError(f"{where}, support #{s}: value {v} not in domain of {b!r}")
                rel[vindex[i][u], vindex[j][v]] = True
            relations[(i, j)] = _frozen(rel)
            relations[(j, i)] = _frozen(rel.T.copy())
            adj[i].add(j)
            adj[j].add(i)
        return cls(
            names=names,
            domains=tuple(doms),
            relations=relations,
            neighbors=tuple(tuple(sorted(s)) for s in adj),
        )

    @property
    def n(self) -> int:
        return len(self.names)

    def domain_size(self, i: int) -> int:
        return len(self.domains[i])

    def index_of(self, var: str | int) -> int:
        """Resolve a variable given by name or by index."""
        if isinstance(var, str):
            try:
                return self._name_index[var]
            except KeyError:
                raise KeyError(f"unknown variable {var!r}") from None
        if _is_int(var) and 0 <= int(var) < self.n:
            return int(var)
        raise KeyError(f"unknown variable {var!r}")

    def value_index(self, i: int, w: int) -> int:
        try:
            return self._value_index[i][w]
        except KeyError:
            raise KeyError(f"value {w!r} not in domain of {self.names[i]!r}") from None

    def constraint_pairs(self) -> list[tuple[int, int]]:
        return sorted((i, j) for (i, j) in self.relations if i < j)

    def supports(self, i: int, j: int, t: int) -> np.ndarray:
        """Indices in ``D_j`` supporting the value at index ``t`` of ``D_i``."""
        return np.flatnonzero(self.relations[(i, j)][t])


class SupportCounts:
    """|pi_j(S_ij^w)| for every directed arc (i, j) and every w in D_i.

    Also holds the flat CSR layout consumed by the propagation kernels.
    """

    def __init__(self, arcs: dict[tuple[int, int], np.ndarray], domain_sizes: Sequence[int],
                 neighbors: Sequence[Sequence[int]]):
        self._arcs = arcs
        n = len(domain_sizes)
        self.dom_size = _frozen(np.asarray(domain_sizes, dtype=np.int64))
        self.dom_ptr = _frozen(np.concatenate([[0], np.cumsum(self.dom_size)]).astype(np.int64))
        self.nbr_ptr = _frozen(
            np.concatenate([[0], np.cumsum([len(nb) for nb in neighbors])]).astype(np.int64)
        )
        self.nbr_idx = _frozen(np.array([j for nb in neighbors for j in nb], dtype=np.int64))
        # arc a = (i -> j) stores count(j, i, v) for v in D_j: how strongly D_i props up D_j
        rev = [arcs[(j, i)] for i in range(n) for j in neighbors[i]]
        self.rev_ptr = _frozen(
            np.concatenate([[0], np.cumsum([len(r) for r in rev])]).astype(np.int64)
        )
        self.rev_cnt = _frozen(
            np.concatenate(rev).astype(np.int64) if rev else np.zeros(0, np.int64)
        )
        zero = np.zeros(int(self.dom_ptr[-1]), dtype=bool)
        for (i, _j), c in arcs.items():
            zero[self.dom_ptr[i]:self.dom_ptr[i + 1]] |= c == 0
        self.zero_support = _frozen(zero)

    @classmethod
    def _from_network(cls, net: ConstraintNetwork) -> "SupportCounts":
        arcs = {key: _frozen(rel.sum(axis=1).astype(np.int64)) for key, rel in net.relations.items()}
        return cls(arcs, [len(d) for d in net.domains], net.neighbors)

    def arc(self, i: int, j: int) -> np.ndarray:
        return self._arcs[(i, j)]

    def count(self, i: int, j: int, t: int) -> int:
        return int(self._arcs[(i, j)][t])

    def arcs(self):
        return self._arcs.items()


def support_counts(net: ConstraintNetwork) -> SupportCounts:
    """Support counts of ``net``; computed once when the network was built."""
    return net.counts


@dataclass(frozen=True)
class RemovalProfile:
    """Hypothesised number of removed values per variable."""

    k: tuple[int, ...]

    @classmethod
    def zeros(cls, net: ConstraintNetwork) -> "RemovalProfile":
        return cls((0,) * net.n)

    @classmethod
    def from_mapping(cls, net: ConstraintNetwork, removals: Mapping[str | int, int]) -> "RemovalProfile":
        k = [0] * net.n
        for var, amount in removals.items():
            try:
                i = net.index_of(var)
            except KeyError as exc:
                raise NetworkError(f"removals: {exc.args[0]}") from None
            k[i] = amount
        prof = cls(tuple(k))
        prof.validate(net)
        return prof

    def validate(self, net: ConstraintNetwork) -> None:
        if len(self.k) != net.n:
            raise NetworkError(f"removal profile has {len(self.k)} entries, network has {net.n} variables")
        for i, k in enumerate(self.k):
            if not _is_int(k):
                raise NetworkError(f"removals[{net.names[i]!r}]: must be an integer")
            if not 0 <= k <= net.domain_size(i):
                raise NetworkError(
                    f"removals[{net.names[i]!r}] = {k}: must lie in [0, {net.domain_size(i)}]"
                )

    def as_dict(self, net: ConstraintNetwork) -> dict[str, int]:
        return {net.names[i]: int(k) for i, k in enumerate(self.k) if k}


def load_network(document: Mapping[str, Any]) -> ConstraintNetwork:
    """Build a network from its JSON document form.

    Errors name the offending part of the document, down to the support tuple.
    """
    if not isinstance(document, Mapping):
        raise NetworkError("network document must be a JSON object")
    variables = document.get("variables")
    if not isinstance(variables, list):
        raise NetworkError("'variables' must be a list")
    names, domains = [], []
    for t, var in enumerate(variables):
        if not isinstance(var, Mapping) or "name" not in var or "domain" not in var:
            raise NetworkError(f"variables[{t}]: expected an object with 'name' and 'domain'")
        if not isinstance(var["domain"], list):
            raise NetworkError(f"variables[{t}]: 'domain' must be a list")
        names.append(var["name"])
        domains.append(var["domain"])
    constraints = []
    for c, con in enumerate(document.get("constraints", [])):
        if not isinstance(con, Mapping) or "scope" not in con or "supports" not in con:
            raise NetworkError(f"constraints[{c}]: expected an object with 'scope' and 'supports'")
        scope, sup = con["scope"], con["supports"]
        if not isinstance(scope, list) or not isinstance(sup, list):
            raise NetworkError(f"constraints[{c}]: 'scope' and 'supports' must be lists")
        if not all(isinstance(s, list) for s in sup):
            raise NetworkError(f"constraints[{c}]: each support must be a [value, value] pair")
        constraints.append((tuple(scope), [tuple(s) for s in sup]))
    return ConstraintNetwork.build(names, domains, constraints)


def read_network(path: str | Path) -> ConstraintNetwork:
    with open(path, encoding="utf-8") as fh:
        return load_network(json.load(fh))


def network_to_document(net: ConstraintNetwork) -> dict[str, Any]:
    cons = []
    for i, j in net.constraint_pairs():
        rel = net.relations[(i, j)]
        sup = [[net.domains[i][a], net.domains[j][b]] for a, b in zip(*np.nonzero(rel))]
        cons.append({"scope": [net.names[i], net.names[j]], "supports": sup})
    return {
        "variables": [{"name": nm, "domain": list(dom)} for nm, dom in zip(net.names, net.domains)],
        "constraints": cons,
    }


def load_profile(net: ConstraintNetwork, document: Mapping[str, Any] | None) -> RemovalProfile:
    """Removal profile from ``{"removals": {name: k}}``; absent variables mean k=0."""
    if not document:
        return RemovalProfile.zeros(net)
    if not isinstance(document, Mapping):
        raise NetworkError("events document must be a JSON object")
    removals = document.get("removals", {})
    if not isinstance(removals, Mapping):
        raise NetworkError("'removals' must be an object mapping variable names to counts")
    return RemovalProfile.from_mapping(net, removals)


def read_profile(net: ConstraintNetwork, path: str | Path) -> RemovalProfile:
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return RemovalProfile.zeros(net)
    return load_profile(net, json.loads(text))


@dataclass
class AC3Result:
    alive: list[np.ndarray]
    wiped_out: bool

    def domains(self, net: ConstraintNetwork) -> list[list[int]]:
        return [[net.domains[i][t] for t in np.flatnonzero(a)] for i, a in enumerate(self.alive)]


def ac3(net: ConstraintNetwork, alive: Sequence[np.ndarray] | None = None) -> AC3Result:
    """Plain AC-3 on a copy of the domains.

    ``alive`` optionally restricts the starting domains (boolean mask per
    variable); the network itself is never modified.
    """
    if alive is None:
        cur = [np.ones(len(d), dtype=bool) for d in net.domains]
    else:
        cur = [np.array(a, dtype=bool, copy=True) for a in alive]
    queue = deque(sorted(net.relations))
    queued = set(queue)
    wiped = any(not a.any() for a in cur)
    while queue and not wiped:
        i, j = queue.popleft()
        queued.discard((i, j))
        rel = net.relations[(i, j)]
        supported = rel[:, cur[j]].any(axis=1)
        drop = cur[i] & ~supported
        if drop.any():
            cur[i] &= supported
            if not cur[i].any():
                wiped = True
                break
            for h in net.neighbors[i]:
                if h != j and (h, i) not in queued:
                    queue.append((h, i))
                    queued.add((h, i))
    if wiped:
        # an empty domain makes the whole network inconsistent
        cur = [np.zeros_like(a) for a in cur]
    return AC3Result(cur, wiped)
