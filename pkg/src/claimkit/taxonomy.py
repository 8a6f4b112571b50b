"""The claim-type hierarchy: stances, argument claims, and routing queries.

The default taxonomy has 17 nodes: Neutral plus 16 argument claim types
grouped under Support (2) and Opposition (14). Two pairs of claims further
qualify a parent claim (LacksFlexibility / NotSufficientTime under
Burdensome; LacksClarity / SeeksExclusion under RequestsClarification).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

__all__ = [
    "Stance",
    "ClaimType",
    "Taxonomy",
    "default_taxonomy",
    "stance_of",
    "depth",
    "members",
]


class Stance(str, Enum):
    NEUTRAL = "Neutral"
    SUPPORT = "Support"
    OPPOSITION = "Opposition"


class ClaimType(str, Enum):
    NEUTRAL = "Neutral"
    EXPLICIT_SUPPORT = "ExplicitSupport"
    LIKELY_SUPPORT = "LikelySupport"
    EXPLICIT_OPPOSITION = "ExplicitOpposition"
    LIKELY_OPPOSITION = "LikelyOpposition"
    BURDENSOME = "Burdensome"
    LACKS_FLEXIBILITY = "LacksFlexibility"
    NOT_SUFFICIENT_TIME = "NotSufficientTime"
    CONFLICTING_INTERESTS = "ConflictingInterests"
    DISPUTED_INFORMATION = "DisputedInformation"
    LEGAL_CHALLENGE = "LegalChallenge"
    OVERREACH = "Overreach"
    REQUESTS_CLARIFICATION = "RequestsClarification"
    LACKS_CLARITY = "LacksClarity"
    SEEKS_EXCLUSION = "SeeksExclusion"
    TOO_BROAD = "TooBroad"
    TOO_NARROW = "TooNarrow"


@dataclass(frozen=True)
class TaxonomyNode:
    claim: ClaimType
    stance: Stance
    parent: ClaimType | None = None


_DEFAULT_NODES: tuple[TaxonomyNode, ...] = (
    TaxonomyNode(ClaimType.NEUTRAL, Stance.NEUTRAL),
    TaxonomyNode(ClaimType.EXPLICIT_SUPPORT, Stance.SUPPORT),
    TaxonomyNode(ClaimType.LIKELY_SUPPORT, Stance.SUPPORT),
    TaxonomyNode(ClaimType.EXPLICIT_OPPOSITION, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.LIKELY_OPPOSITION, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.BURDENSOME, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.LACKS_FLEXIBILITY, Stance.OPPOSITION, ClaimType.BURDENSOME),
    TaxonomyNode(ClaimType.NOT_SUFFICIENT_TIME, Stance.OPPOSITION, ClaimType.BURDENSOME),
    TaxonomyNode(ClaimType.CONFLICTING_INTERESTS, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.DISPUTED_INFORMATION, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.LEGAL_CHALLENGE, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.OVERREACH, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.REQUESTS_CLARIFICATION, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.LACKS_CLARITY, Stance.OPPOSITION, ClaimType.REQUESTS_CLARIFICATION),
    TaxonomyNode(ClaimType.SEEKS_EXCLUSION, Stance.OPPOSITION, ClaimType.REQUESTS_CLARIFICATION),
    TaxonomyNode(ClaimType.TOO_BROAD, Stance.OPPOSITION),
    TaxonomyNode(ClaimType.TOO_NARROW, Stance.OPPOSITION),
)


class Taxonomy:
    """Immutable claim hierarchy with stance routing and depth queries."""

    def __init__(self, nodes: Iterable[TaxonomyNode]):
        self._nodes: dict[ClaimType, TaxonomyNode] = {}
        for node in nodes:
            if node.claim in self._nodes:
                raise ValueError(f"duplicate taxonomy node: {node.claim.value}")
            self._nodes[node.claim] = node
        for node in self._nodes.values():
            if node.parent is not None:
                parent = self._nodes.get(node.parent)
                if parent is None:
                    raise ValueError(f"{node.claim.value}: unknown parent {node.parent.value}")
                if parent.stance is not node.stance:
                    raise ValueError(
                        f"{node.claim.value}: stance differs from parent {node.parent.value}"
                    )

    def __contains__(self, claim: ClaimType) -> bool:
        return claim in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    @property
    def claims(self) -> tuple[ClaimType, ...]:
        """All nodes in declaration order (Neutral first for the default)."""
        return tuple(self._nodes)

    def argument_claims(self) -> tuple[ClaimType, ...]:
        return tuple(c for c in self._nodes if self.stance_of(c) is not Stance.NEUTRAL)

    def stance_of(self, claim: ClaimType) -> Stance:
        return self._nodes[claim].stance

    def parent_of(self, claim: ClaimType) -> ClaimType | None:
        return self._nodes[claim].parent

    def depth(self, claim: ClaimType) -> int:
        """0 for Neutral, 1 for stance-level claims, 2 for nested sub-claims."""
        node = self._nodes[claim]
        if node.stance is Stance.NEUTRAL:
            return 0
        d = 1
        while node.parent is not None:
            node = self._nodes[node.parent]
            d += 1
        return d

    def members(self, stance: Stance) -> frozenset[ClaimType]:
        """Argument claims routed under a stance; Neutral has none."""
        if stance is Stance.NEUTRAL:
            raise ValueError("Neutral has no argument members")
        return frozenset(c for c, n in self._nodes.items() if n.stance is stance)

    # -- declarative file form -------------------------------------------

    def to_records(self) -> list[dict]:
        return [
            {
                "id": node.claim.value,
                "stance": node.stance.value,
                "parent": node.parent.value if node.parent else None,
            }
            for node in self._nodes.values()
        ]

    def save(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for record in self.to_records():
                fh.write(json.dumps(record) + "\n")

    @staticmethod
    def load(path: str | Path) -> "Taxonomy":
        nodes = []
        with Path(path).open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                nodes.append(
                    TaxonomyNode(
                        ClaimType(rec["id"]),
                        Stance(rec["stance"]),
                        ClaimType(rec["parent"]) if rec.get("parent") else None,
                    )
                )
        return Taxonomy(nodes)


_DEFAULT = Taxonomy(_DEFAULT_NODES)


def default_taxonomy() -> Taxonomy:
    return _DEFAULT


def stance_of(claim: ClaimType) -> Stance:
    return _DEFAULT.stance_of(claim)


def depth(claim: ClaimType) -> int:
    return _DEFAULT.depth(claim)


def members(stance: Stance) -> frozenset[ClaimType]:
    return _DEFAULT.members(stance)
