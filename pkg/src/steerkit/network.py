"""Directed steering graphs of small networks and their four-case taxonomy."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .criteria import MeasurementScheme, steerable
from .lhs import Status
from .projective import classify_all_projective
from .qstate import XStateParams
from .scenarios import Kind, PairRole, Scenario, reduced_pair_state


class NetworkCase(str, enum.Enum):
    ALL_MUTUAL = "Case1_AllMutual"
    HUB_MUTUAL = "Case2_HubMutual"
    HUB_ONE_WAY = "Case3_HubOneWay"
    NO_STEERING = "Case4_NoSteering"
    MIXED = "Mixed/Undecided"


@dataclass(frozen=True)
class SteeringGraph:
    """edges[(i, j)] is the status of party i steering party j; party 0 is the SRPE hub."""

    n: int
    edges: dict

    def status(self, i: int, j: int) -> Status:
        return self.edges[(i, j)]

    def matrix(self) -> list[list[str | None]]:
        return [
            [None if i == j else self.edges[(i, j)].value for j in range(self.n)]
            for i in range(self.n)
        ]


def edge_status(x: XStateParams, scheme: MeasurementScheme) -> Status:
    """Status of the first qubit of x steering the second."""
    if scheme.analytic:
        return Status.STEERABLE if steerable(x, scheme).steerable else Status.UNSTEERABLE
    return classify_all_projective(x.to_state(), scheme.resolution).status


def pairwise_matrix(sc: Scenario, scheme: MeasurementScheme) -> SteeringGraph:
    n = sc.n
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    if sc.kind is not Kind.SRPE:
        s = edge_status(reduced_pair_state(sc), scheme)
        return SteeringGraph(n, {p: s for p in pairs})
    states = [reduced_pair_state(sc, PairRole.ALICE_TO_BOB), reduced_pair_state(sc, PairRole.BOB_TO_ALICE)]
    with ThreadPoolExecutor(max_workers=2) as pool:
        hub_out, hub_in = pool.map(lambda x: edge_status(x, scheme), states)
    edges = {}
    for i, j in pairs:
        if i == 0:
            edges[(i, j)] = hub_out
        elif j == 0:
            edges[(i, j)] = hub_in
        else:
            # two spokes only ever share mixtures of product states
            edges[(i, j)] = Status.UNSTEERABLE
    return SteeringGraph(n, edges)


def classify(graph: SteeringGraph) -> NetworkCase:
    statuses = set(graph.edges.values())
    if Status.UNDECIDED in statuses:
        return NetworkCase.MIXED
    if statuses == {Status.STEERABLE}:
        return NetworkCase.ALL_MUTUAL
    if statuses == {Status.UNSTEERABLE}:
        return NetworkCase.NO_STEERING
    n = graph.n
    for hub in range(n):
        spokes = [k for k in range(n) if k != hub]
        if not all(graph.edges[(hub, k)] is Status.STEERABLE for k in spokes):
            continue
        if any(graph.edges[(j, k)] is Status.STEERABLE for j in spokes for k in spokes if j != k):
            continue
        back = {graph.edges[(k, hub)] for k in spokes}
        if back == {Status.STEERABLE}:
            return NetworkCase.HUB_MUTUAL
        if back == {Status.UNSTEERABLE}:
            return NetworkCase.HUB_ONE_WAY
    return NetworkCase.MIXED
