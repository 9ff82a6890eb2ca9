"""Named example operators used by the figure commands and tests."""

from __future__ import annotations

import numpy as np

from .linalg import ComplexMatrix

OMEGA = np.exp(2j * np.pi / 3)


def nonconvex_example() -> ComplexMatrix:
    """diag(1, 0, 0, i) on two qubits; its product range is {sqrt x + sqrt y <= 1}."""
    return ComplexMatrix((2, 2), np.diag([1, 0, 0, 1j]))


def jordan_block(r: float) -> np.ndarray:
    """[[1, 2r], [0, 1]], whose numerical range is the disc |z - 1| <= r."""
    return np.array([[1.0, 2.0 * r], [0.0, 1.0]], dtype=complex)


def disc_product(r1: float, r2: float) -> ComplexMatrix:
    """Y(r1, r2) = J(r1) x J(r2); the product range is D(1, r1) D(1, r2)."""
    return ComplexMatrix((2, 2), np.kron(jordan_block(r1), jordan_block(r2)))


def three_qubit_holed() -> ComplexMatrix:
    """diag(1, w, w, w*, w, w*, w*, 1): product range with one hole."""
    w, wb = OMEGA, np.conj(OMEGA)
    return ComplexMatrix((2, 2, 2), np.diag([1, w, w, wb, w, wb, wb, 1]))


def three_qubit_convex() -> ComplexMatrix:
    """diag(1, w, w, w, w*, w*, w*, 1): product range equals the triangle W."""
    w, wb = OMEGA, np.conj(OMEGA)
    return ComplexMatrix((2, 2, 2), np.diag([1, w, w, w, wb, wb, wb, 1]))


def four_qubit_genus_two() -> ComplexMatrix:
    """Diagonal four-qubit operator whose product range has two holes."""
    e = lambda k: np.exp(1j * np.pi * k / 4)  # noqa: E731
    d = [e(1), 1j, 1j, e(3), -1, e(-3), e(-1), 1,
         -1, e(-1), e(-3), 1, e(3), -1j, -1j, e(1)]
    return ComplexMatrix((2, 2, 2, 2), np.diag(d))


FIGURES = {
    "fig1": ("parametrized", nonconvex_example),
    "fig2a": ("tensor", lambda: (1.0, 1.0)),
    "fig2b": ("tensor", lambda: (0.7, 1.0)),
    "fig2c": ("tensor", lambda: (0.5, 1.2)),
    "fig3a": ("parametrized", three_qubit_holed),
    "fig3b": ("parametrized", three_qubit_convex),
    "fig4": ("parametrized", four_qubit_genus_two),
}
