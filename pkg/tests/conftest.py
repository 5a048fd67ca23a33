from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from tdce.experiments import simulate_link
from tdce.taps import ChannelSpec


class QComplex:
    """Complex number with exact rational parts, enough for +, - and *."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def wrap(cls, v):
        if isinstance(v, QComplex):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real), Fraction(v.imag))
        return cls(Fraction(v), 0)

    def __add__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = QComplex.wrap(o)
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = QComplex.wrap(o)
        return QComplex(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = QComplex.wrap(o)
        return QComplex(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __eq__(self, o):
        o = QComplex.wrap(o)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"QComplex({self.re}, {self.im})"


def random_rationals(rng: np.random.Generator, n: int, den: int = 7) -> np.ndarray:
    out = np.empty(n, dtype=object)
    for k in range(n):
        out[k] = QComplex(Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, den + 1))),
                          Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, den + 1))))
    return out


@pytest.fixture(scope="session")
def one_span():
    return ChannelSpec()


@pytest.fixture(scope="session")
def small_link(one_span):
    """Short noisy 1-span run, enough for plumbing tests."""
    return simulate_link(one_span, symbols=2**12, seed=3)


@pytest.fixture(scope="session")
def full_link(one_span):
    """2^16-symbol linear 1-span run at 0 dBm."""
    return simulate_link(one_span, symbols=2**16, seed=0)


# acceptance lines, filled by test_acceptance and echoed in the summary
ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> str:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion:2d}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
