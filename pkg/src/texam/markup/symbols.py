"""Fixed symbol table: command name -> (codepoint, class).

The table is closed; anything absent is an unknown command at parse time.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class SymbolClass(Enum):
    LETTER = "letter"      # rendered <mi>
    OPERATOR = "operator"  # rendered <mo>
    BIGOP = "bigop"        # sum-like, takes lower/upper limits


@dataclass(frozen=True)
class SymbolInfo:
    name: str
    char: str
    cls: SymbolClass


_GREEK_LOWER = {
    "alpha": "α", "beta": "β", "gamma": "γ", "delta": "δ",
    "epsilon": "ε", "zeta": "ζ", "eta": "η", "theta": "θ",
    "iota": "ι", "kappa": "κ", "lambda": "λ", "mu": "μ",
    "nu": "ν", "xi": "ξ", "omicron": "ο", "pi": "π",
    "rho": "ρ", "sigma": "σ", "tau": "τ", "upsilon": "υ",
    "phi": "φ", "chi": "χ", "psi": "ψ", "omega": "ω",
}

# Capitals with a command of their own (the rest coincide with Latin letters).
_GREEK_UPPER = {
    "Gamma": "Γ", "Delta": "Δ", "Theta": "Θ", "Lambda": "Λ",
    "Xi": "Ξ", "Pi": "Π", "Sigma": "Σ", "Upsilon": "Υ",
    "Phi": "Φ", "Psi": "Ψ", "Omega": "Ω",
}

_OPERATORS = {
    "pm": "±", "times": "×", "cdot": "⋅", "leq": "≤",
    "geq": "≥", "neq": "≠", "infty": "∞", "rightarrow": "→",
    "partial": "∂", "ldots": "…",
}

_BIG_OPS = {
    "sum": "∑", "prod": "∏", "int": "∫",
}

SYMBOLS: dict[str, SymbolInfo] = {}
for _table, _cls in ((_GREEK_LOWER, SymbolClass.LETTER),
                     (_GREEK_UPPER, SymbolClass.LETTER),
                     (_OPERATORS, SymbolClass.OPERATOR),
                     (_BIG_OPS, SymbolClass.BIGOP)):
    for _name, _char in _table.items():
        SYMBOLS[_name] = SymbolInfo(_name, _char, _cls)


def symbol_lookup(name: str) -> SymbolInfo | None:
    """Total over the fixed table; None for anything else."""
    return SYMBOLS.get(name)
