"""Case catalog primitives: tags, parameter records, validation.

Seven immersion cases are supported. Tags name the ambient signature and
the component manifold: flat (euc-*) vs prescribed-curvature (cur-, hyp-)
and body (f0) / one-odd-variable (f2) / two-odd-variable (f3) types, the
f3 family splitting into case 1 (constant odd-sector metric entry) and
case 2 (odd-free conformal factor).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from superframes.fields import ThetaPoly

CASE_TAGS = (
    "euc-f0",
    "euc-f2",
    "euc-f3-c1",
    "euc-f3-c2",
    "cur-f0",
    "hyp-f3-c1",
    "hyp-f3-c2",
)

# frame dimension and derivative index set per case
FRAME_DIMS = {
    "euc-f0": (3, (1, 2)),
    "euc-f2": (4, (1, 2, 3)),
    "euc-f3-c1": (5, (1, 2, 3, 4)),
    "euc-f3-c2": (5, (1, 2, 3, 4)),
    "cur-f0": (4, (1, 2)),
    "hyp-f3-c1": (6, (1, 2, 3, 4)),
    "hyp-f3-c2": (6, (1, 2, 3, 4)),
}

# geometry fields each case expects (constructed ones in parentheses)
REQUIRED_FIELDS = {
    "euc-f0": ("u", "Q", "H"),
    "euc-f2": ("u", "q", "h"),
    "euc-f3-c1": ("u", "q", "h"),
    "euc-f3-c2": ("u", "Q", "H"),
    "cur-f0": ("u", "Q", "H"),
    "hyp-f3-c1": ("u", "H", "G"),
    "hyp-f3-c2": ("phi", "psi", "Q", "H", "G"),
}


class ConstraintViolation(ValueError):
    """A strict case constraint fails; carries the worst node when known."""

    def __init__(self, name, detail, node=None):
        self.name = name
        self.node = node
        loc = f" (worst node {node})" if node is not None else ""
        super().__init__(f"constraint {name} violated: {detail}{loc}")


@dataclass(frozen=True)
class CaseSpec:
    """Tagged case description with its real/complex parameters."""

    tag: str
    a: float = 0.0
    b: float = 0.0
    k: float = 1.0
    alpha: complex = 0j
    beta: complex = 0j
    gamma: float = 0.0
    c: float = -1.0
    eps: int = 1

    def __post_init__(self):
        if self.tag not in CASE_TAGS:
            raise ValueError(f"unknown case tag {self.tag!r}; expected one of {CASE_TAGS}")
        if self.eps not in (-1, 1):
            raise ValueError("eps must be +1 or -1")
        if self.tag in ("cur-f0", "hyp-f3-c1", "hyp-f3-c2") and self.c == 0:
            raise ValueError("curved cases need a nonzero curvature constant c")
        if self.tag.startswith("hyp-") and self.c >= 0:
            raise ValueError(f"{self.tag} requires c < 0, got c = {self.c}")
        if self.tag == "euc-f2":
            if self.k == 0:
                raise ValueError("euc-f2 requires k != 0")
            if self.a == 0 and self.b == 0:
                raise ValueError("euc-f2 requires (a, b) != (0, 0)")
        if self.tag in ("euc-f3-c1", "hyp-f3-c1") and self.k == 0:
            raise ValueError(f"{self.tag} requires k != 0")

    def with_params(self, **kw):
        return replace(self, **kw)

    def validate_family(self):
        """Strict solvability constraints for the closed-form families."""
        if self.tag == "hyp-f3-c1":
            lhs = self.alpha.real * self.gamma
            rhs = abs(self.beta) ** 2 - self.c * self.alpha.real ** 2 / self.k ** 2
            if not lhs < rhs:
                raise ConstraintViolation(
                    "case1-slope-bound",
                    f"alpha*gamma < |beta|^2 - c*alpha^2/k^2 fails: {lhs} >= {rhs}")
        return self


def omega_poly(spec):
    """The odd-variable factor of the case metric, as a polynomial."""
    if spec.tag == "euc-f2":
        return ThetaPoly.from_terms({(0, 0): spec.b, (1, 0): spec.a})
    if spec.tag == "euc-f3-c1":
        return ThetaPoly.from_terms({(0, 0): spec.gamma, (1, 0): spec.alpha,
                                     (0, 1): spec.alpha.conjugate()})
    if spec.tag == "euc-f3-c2":
        # |beta theta3 + conj(beta) theta4| read as the bilinear expansion,
        # keeping the value real with vanishing second theta derivatives
        return ThetaPoly.from_terms({(0, 0): spec.gamma ** 2,
                                     (1, 0): spec.beta,
                                     (0, 1): spec.beta.conjugate(),
                                     (1, 1): spec.alpha.real ** 2})
    if spec.tag == "hyp-f3-c1":
        return ThetaPoly.from_terms({(0, 0): spec.gamma,
                                     (1, 0): spec.beta,
                                     (0, 1): spec.beta.conjugate(),
                                     (1, 1): spec.alpha.real})
    raise ValueError(f"case {spec.tag} has no odd metric factor")


def hyp_c1_sigma_squared(spec):
    """Conformal-factor equation coefficient for the hyp-f3-c1 family.

    d1 d2 u = -2 sigma^2 e^u with
    sigma^2 = (|beta|^2 - alpha*gamma - c*alpha^2/k^2) / k^2.
    """
    alpha = spec.alpha.real
    return (abs(spec.beta) ** 2 - alpha * spec.gamma
            - spec.c * alpha ** 2 / spec.k ** 2) / spec.k ** 2
