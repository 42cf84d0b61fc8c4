"""Built-in example maps with their known invariants.

Each entry may carry oracle annotations: for ``"lambda"`` and ``"rho"`` a
pair ``(plus, minus)`` of factor lists cutting out the preimages of ``i``
and ``-i`` near the point, which :func:`oracles.hopf_from_cycles` turns
into an independent value of the corresponding Hopf invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .oracles import CycleFactor as C
from .polymap import parse_map

ORIGIN = (0.0, 0.0, 0.0, 0.0)

EX45_F = "w^3 - 3*abs2(z)*(1 + z - zb)*w - 2*(z + zb)"
EX45_G = "w^3 - 3*abs2(z^2)*(1 + z^2 - zb^2)*w - 2*(z^2 + zb^2)"


def example47_family(a: int, b: int, c: int, d: int) -> str:
    """Source of ``(z^a + w^b) * conj(z^c + w^d)``."""
    return f"(z^{a} + w^{b})*conj(z^{c} + w^{d})"


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    map_src: str
    point: tuple = ORIGIN
    expected: tuple | None = None  # (lambda, rho, mu)
    notes: str = ""
    oracle_annotations: dict = field(default_factory=dict)

    def __post_init__(self):
        parse_map(self.map_src)
        if self.expected is not None:
            lam, rho, mu = self.expected
            if lam + rho != mu:
                raise ValueError(f"{self.name}: expected values violate lambda + rho = mu")
            if not self.notes:
                raise ValueError(f"{self.name}: expected values need a source note")

    @property
    def map(self):
        return parse_map(self.map_src)


ENTRIES = (
    RegistryEntry(
        "trefoil",
        "z^2 + w^3",
        expected=(0, 2, 2),
        notes="z^2+w^3 at the origin; l is constantly i for analytic maps, rho equals mu",
        oracle_annotations={
            "lambda": ([], []),
            "rho": ([C("conj(3*w^2)", "conjugate-analytic")], [C("2*z")]),
        },
    ),
    RegistryEntry(
        "mirror-trefoil",
        "zb^2 - w^3",
        expected=(2, 0, 2),
        notes="z^2+w^3 precomposed with quaternion conjugation; lambda and rho swap",
    ),
    RegistryEntry(
        "figure8-F",
        EX45_F,
        expected=(0, 0, 0),
        notes="genuine isolated critical point with unknotted local link",
    ),
    RegistryEntry(
        "figure8-G",
        EX45_G,
        expected=(1, 1, 2),
        notes="F(z^2, w); local link is the figure-8 knot, amphicheiral so lambda = rho",
    ),
    RegistryEntry(
        "ex47-F",
        example47_family(2, 3, 3, 2),
        expected=(1, 2, 3),
        notes="f * conj(g) with f = z^2+w^3, g = z^3+w^2; "
              "the rho cycle over i is replaced by wb - z, which has the same local intersections",
        oracle_annotations={
            "lambda": (
                [C("z"), C("conj(z^2 + w^3)", "conjugate-analytic")],
                [C("w"), C("conj(z^3 + w^2)", "conjugate-analytic"), C("4 - 9*z*w")],
            ),
            "rho": (
                [C("wb - z", "general")],
                [C("z"), C("wb", "conjugate-analytic")],
            ),
        },
    ),
    RegistryEntry(
        "regular-point",
        "z",
        expected=(0, 0, 0),
        notes="a regular point; the plane field extends over the ball",
    ),
)

REGISTRY = {e.name: e for e in ENTRIES}


def get_entry(name: str) -> RegistryEntry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown registry entry {name!r}; choose from {', '.join(REGISTRY)}") from None
