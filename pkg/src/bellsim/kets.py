"""Text rendering of amplitudes and kets in the paper's left-to-right style."""

from __future__ import annotations

import math

import numpy as np

from .statecore import PureState, bits_of

_ZERO = 1e-12


def fmt_real(x: float) -> str:
    s = f"{x:.12g}"
    return "0" if s in ("-0", "0") else s


def fmt_complex(z: complex) -> str:
    """``re``, ``imi`` or ``re±imi`` with 12 significant digits."""
    z = complex(z)
    re, im = z.real, z.imag
    if abs(im) < _ZERO:
        return fmt_real(re)
    if abs(re) < _ZERO:
        return f"{fmt_real(im)}i"
    sign = "-" if im < 0 else "+"
    return f"{fmt_real(re)}{sign}{fmt_real(abs(im))}i"


def scalar_label(s: float) -> str:
    """Name a dropped constant, e.g. 0.5 -> '1/2', 0.7071... -> '1/√2'."""
    if s == 1.0:
        return "1"
    inv_sq = 1.0 / (s * s)
    k = round(inv_sq)
    if k >= 1 and abs(inv_sq - k) < 1e-9:
        r = math.isqrt(k)
        if r * r == k:
            return f"1/{r}"
        if k % 2 == 0:
            j = math.isqrt(k // 2)
            if j * j * 2 == k:
                return "1/√2" if j == 1 else f"1/({j}√2)"
    return fmt_real(s)


def _coefficient(c: complex) -> str:
    """Coefficient written in front of a ket; unit values are implicit."""
    if abs(c - 1) < _ZERO:
        return ""
    if abs(c + 1) < _ZERO:
        return "-"
    text = fmt_complex(c)
    if abs(c.real) >= _ZERO and abs(c.imag) >= _ZERO:
        return f"({text})"
    return text


def _join(terms: list[str]) -> str:
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return out


def format_amplitudes(amps, group: int = 0) -> str:
    """Sum-of-kets text for an amplitude vector (no normalization assumed).

    With ``group=k`` terms are collected by the leading ``k`` qubits:
    ``|00⟩(a|0⟩ + b|1⟩) + ...``.
    """
    amps = np.asarray(amps, dtype=np.complex128)
    n = amps.size.bit_length() - 1
    if group <= 0 or group >= n:
        terms = [f"{_coefficient(c)}|{bits_of(i, n)}⟩" for i, c in enumerate(amps) if abs(c) >= _ZERO]
        return _join(terms)
    inner = n - group
    terms = []
    for head in range(1 << group):
        block = amps[head << inner:(head + 1) << inner]
        if np.all(np.abs(block) < _ZERO):
            continue
        nz = np.flatnonzero(np.abs(block) >= _ZERO)
        if nz.size == 1:
            i = int(nz[0])
            terms.append(f"{_coefficient(block[i])}|{bits_of(head, group)}⟩|{bits_of(i, inner)}⟩")
        else:
            terms.append(f"|{bits_of(head, group)}⟩({format_amplitudes(block)})")
    return _join(terms)


def format_ket(state: PureState, scale: float = 1.0, group: int = 0) -> str:
    return format_amplitudes(state.amplitudes / scale, group)


def scale_note(scale: float) -> str:
    return "" if scale == 1.0 else f"×{scalar_label(scale)}"


def complex_pair(z: complex) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def vector_json(v) -> list[list[float]]:
    return [complex_pair(z) for z in np.asarray(v).reshape(-1)]


def matrix_json(m) -> list[list[list[float]]]:
    return [vector_json(row) for row in np.asarray(m)]
