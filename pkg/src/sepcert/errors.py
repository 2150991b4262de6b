"""Exception taxonomy shared by all sepcert modules.

Every error carries a ``category`` that the CLI maps onto its exit-code
contract: "math" for mathematical failure modes (exit 1), "resource" for
exhaustion of a configured search budget (exit 2), "parse" for malformed
input (exit 3).
"""

from __future__ import annotations


class SepcertError(Exception):
    category = "math"


# --- contract / input errors -------------------------------------------------

class NotPrime(SepcertError):
    """A modulus that must be prime is composite."""


class MixedFields(SepcertError):
    """Operands belong to different number fields."""


class NotCommuting(SepcertError):
    """Generators that must commute do not."""


class Reducible(SepcertError):
    """A polynomial required to be irreducible over the rationals factors."""


class UnsupportedTower(SepcertError):
    """Field extension requested over a base field other than the rationals."""


class NotInvertible(SepcertError):
    """A matrix or ring element required to be invertible is not."""


class ResidueUndefined(SepcertError):
    """The residue map collides with a denominator or the index guard."""


class NotApplicable(SepcertError):
    """The operation's precondition rules out this input."""


class ParseError(SepcertError):
    category = "parse"


# --- mathematical negatives --------------------------------------------------

class NeedsFieldExtension(SepcertError):
    """Eigenvalues leave the working field; carries the obstructing factor.

    ``factor`` is a rational polynomial (ascending Fraction coefficients).
    """

    def __init__(self, factor, message=""):
        self.factor = tuple(factor)
        super().__init__(message or "eigenvalue outside the working field")


class InSubgroup(SepcertError):
    """The element to separate already lies in the subgroup."""


class NotUnipotentFree(SepcertError):
    """The subgroup contains a non-trivial unipotent; carries the witness."""

    def __init__(self, witness, message="subgroup contains a non-trivial unipotent"):
        self.witness = witness
        super().__init__(message)


class CosetMembership(SepcertError):
    """A coset representative absorbs the target element (caller error)."""


class NotInLattice(SepcertError):
    """An exact discrete logarithm has no solution (upstream certification bug)."""


class NotInProduct(SepcertError):
    """A power does not decompose over the complement-times-free product."""


class AllTorsion(SepcertError):
    """Every unit in the list is a root of unity; no free basis exists."""


class BasisSelectionError(SepcertError):
    """No index subset generates the power subgroup; generators need recombination."""


# --- resource exhaustion -----------------------------------------------------

class ResourceError(SepcertError):
    category = "resource"


class BoundExceeded(ResourceError):
    """The relation search budget was insufficient to certify the answer."""


class CapExceeded(ResourceError):
    """A finite closure grew beyond the configured cap."""


class ModulusNotFound(ResourceError):
    """No certified modulus exists below the search limit."""


class FallbackExhausted(ResourceError):
    """A verified certificate could not be produced after ambient enlargement."""
