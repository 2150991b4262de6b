"""Finite-quotient separability certificates for abelian unipotent-free
subgroups of finitely generated linear groups over number fields."""

__version__ = "0.1.0"
