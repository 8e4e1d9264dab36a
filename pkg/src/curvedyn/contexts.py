"""Scalar contexts: field choice (real/complex) and working precision.

53-bit contexts use hardware floats (and numpy arrays in the batch kernels).
Higher precisions are backed by MPFR/MPC through gmpy2; every operation that
manipulates high-precision scalars must run inside ``ctx.active()`` so the
thread-local gmpy2 precision is set correctly.
"""

from __future__ import annotations

import cmath
import contextlib
import math
from dataclasses import dataclass

import gmpy2

REAL = "real"
COMPLEX = "complex"


@dataclass(frozen=True)
class ScalarContext:
    """Field + mantissa-width tag carried by points and curve models."""

    field: str = REAL
    precision_bits: int = 53

    def __post_init__(self):
        if self.field not in (REAL, COMPLEX):
            raise ValueError(f"unknown field {self.field!r}")
        if self.precision_bits < 53:
            raise ValueError("precision_bits must be >= 53")

    # -- basic queries -------------------------------------------------

    @property
    def is_complex(self) -> bool:
        return self.field == COMPLEX

    @property
    def hardware(self) -> bool:
        return self.precision_bits == 53

    @property
    def eps(self) -> float:
        return 2.0 ** (1 - self.precision_bits)

    def active(self):
        """Context manager installing this precision for gmpy2 arithmetic."""
        if self.hardware:
            return contextlib.nullcontext()
        return gmpy2.local_context(gmpy2.context(), precision=self.precision_bits)

    # -- scalar constructors -------------------------------------------

    def make(self, x):
        """Coerce x to this context's scalar type (real or complex)."""
        if self.hardware:
            if self.is_complex:
                return complex(x)
            if isinstance(x, complex):
                raise TypeError("complex value in a real context")
            return float(x)
        with self.active():
            if self.is_complex:
                return gmpy2.mpc(x)
            if isinstance(x, complex):
                raise TypeError("complex value in a real context")
            return gmpy2.mpfr(x)

    def triple(self, xs):
        a, b, c = xs
        return (self.make(a), self.make(b), self.make(c))

    # -- arithmetic helpers (work for both backends) ---------------------

    def sqrt(self, x):
        if self.hardware:
            return math.sqrt(x) if not isinstance(x, complex) else cmath.sqrt(x)
        return gmpy2.sqrt(x)

    def log(self, x):
        if self.hardware:
            return math.log(x)
        return gmpy2.log(x)

    def acos(self, x):
        x = min(1.0, max(-1.0, float(x))) if self.hardware else x
        if self.hardware:
            return math.acos(x)
        one = gmpy2.mpfr(1)
        return gmpy2.acos(min(one, max(-one, gmpy2.mpfr(x))))

    def asin(self, x):
        if self.hardware:
            return math.asin(min(1.0, max(-1.0, float(x))))
        one = gmpy2.mpfr(1)
        return gmpy2.asin(min(one, max(-one, gmpy2.mpfr(x))))

    def abs2(self, x):
        """|x|^2 without the square root."""
        if isinstance(x, (float, int)):
            return x * x
        if isinstance(x, complex):
            return x.real * x.real + x.imag * x.imag
        if isinstance(x, gmpy2.mpc):
            return gmpy2.norm(x)
        return x * x

    def to_float(self, x):
        return float(x)

    def to_complex(self, x):
        return complex(x)

    def conj(self, x):
        if isinstance(x, complex):
            return x.conjugate()
        if isinstance(x, gmpy2.mpc):
            return x.conjugate()
        return x


CTX_R = ScalarContext(REAL, 53)
CTX_C = ScalarContext(COMPLEX, 53)


def require_same(ctx_a: ScalarContext, ctx_b: ScalarContext):
    from .errors import ContextMismatch

    if ctx_a != ctx_b:
        raise ContextMismatch(f"{ctx_a} vs {ctx_b}")
