"""Weight sequences ``(w_i)_{i >= 1}`` and their prefix sums ``S(i)``."""
from __future__ import annotations

import math
import threading
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from ._kernels import compensated_cumsum

UNIFORM = "uniform"
HOPPE = "hoppe"
THETA_K = "thetak"
POWER = "power"
CUSTOM = "custom"


class WeightTableExhausted(IndexError):
    """Raised when a table-backed sequence is asked for an index past its end."""

    def __init__(self, index: int):
        super().__init__(f"weight table exhausted at index {index}")
        self.index = index


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


class WeightSequence:
    """A positive weight family with lazily tabulated prefix sums.

    Build instances through the classmethods (:meth:`uniform`, :meth:`hoppe`,
    :meth:`theta_k`, :meth:`power`, :meth:`custom`) or :func:`parse_family`.
    Instances are immutable; the prefix table cache is guarded by a lock so a
    single instance can be shared between threads.
    """

    def __init__(self, family: str, *, theta: float = 1.0, k: int = 1, a: float = 0.0,
                 table: Optional[Sequence[float]] = None,
                 exact_table: Optional[Sequence[Fraction]] = None,
                 ones_tail: bool = False, label: Optional[str] = None):
        self.family = family
        self.theta = theta
        self.k = k
        self.a = a
        self.table = None if table is None else np.asarray(table, dtype=np.float64)
        self.exact_table = None if exact_table is None else tuple(exact_table)
        self.ones_tail = ones_tail
        self._label = label
        self._lock = threading.Lock()
        self._prefix = np.empty(0, dtype=np.float64)
        if self.table is not None:
            self.table.setflags(write=False)

    # -- constructors -----------------------------------------------------
    @classmethod
    def uniform(cls) -> "WeightSequence":
        return cls(UNIFORM)

    @classmethod
    def hoppe(cls, theta: float) -> "WeightSequence":
        return cls(HOPPE, theta=_positive("theta", theta))

    @classmethod
    def theta_k(cls, theta: float, k: int) -> "WeightSequence":
        if int(k) != k or k < 1:
            raise ValueError(f"k must be a positive integer, got {k!r}")
        return cls(THETA_K, theta=_positive("theta", theta), k=int(k))

    @classmethod
    def power(cls, a: float) -> "WeightSequence":
        a = float(a)
        if not math.isfinite(a):
            raise ValueError(f"exponent must be finite, got {a!r}")
        return cls(POWER, a=a)

    @classmethod
    def custom(cls, table: Iterable, *, ones_tail: bool = False,
               label: Optional[str] = None) -> "WeightSequence":
        """Table-backed weights; ``ones_tail`` continues the table with ones.

        Entries may be floats, ints, Fractions or decimal strings.  Strings and
        rationals also populate the exact accessor used by the enumeration
        oracle.
        """
        exact = []
        values = []
        for x in table:
            fx = Fraction(x)
            exact.append(fx)
            values.append(_positive("weight", float(fx)))
        if not values:
            raise ValueError("custom weight table is empty")
        return cls(CUSTOM, table=values, exact_table=exact, ones_tail=ones_tail, label=label)

    @classmethod
    def eventually_one(cls, head: Iterable) -> "WeightSequence":
        """``w = (head..., 1, 1, ...)``."""
        head = list(head)
        return cls.custom(head, ones_tail=True,
                          label="wrt:" + ",".join(_fmt(float(Fraction(x))) for x in head))

    @classmethod
    def from_file(cls, path, *, ones_tail: bool = False) -> "WeightSequence":
        """One positive decimal number per line; line ``i`` holds ``w_i``."""
        entries = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            s = line.strip()
            if not s:
                continue
            try:
                value = Fraction(s)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a decimal number: {s!r}") from None
            if value <= 0:
                raise ValueError(f"{path}:{lineno}: weight must be positive")
            entries.append(value)
        return cls.custom(entries, ones_tail=ones_tail, label=f"custom:{path}")

    # -- descriptors ------------------------------------------------------
    def __repr__(self) -> str:
        return f"WeightSequence({self.spec!r})"

    @property
    def spec(self) -> str:
        """The family string understood by :func:`parse_family`."""
        if self._label is not None:
            return self._label
        if self.family == UNIFORM:
            return "uniform"
        if self.family == HOPPE:
            return f"hoppe:{_fmt(self.theta)}"
        if self.family == THETA_K:
            return f"thetak:{_fmt(self.theta)},{self.k}"
        if self.family == POWER:
            return f"power:{_fmt(self.a)}"
        return "custom:" + ",".join(_fmt(x) for x in self.table)

    @property
    def length(self) -> Optional[int]:
        """Largest valid index, or ``None`` for infinite sequences."""
        if self.family == CUSTOM and not self.ones_tail:
            return len(self.table)
        return None

    @property
    def constancy_index(self) -> Optional[int]:
        """Smallest ``k`` with ``w_i = 1`` for every ``i > k``; ``None`` if there is none."""
        if self.family == UNIFORM:
            return 0
        if self.family == HOPPE:
            return 0 if self.theta == 1 else 1
        if self.family == THETA_K:
            return 0 if self.theta == 1 else self.k
        if self.family == POWER:
            return 0 if self.a == 0 else None
        if not self.ones_tail:
            return None
        k = len(self.table)
        while k > 0 and self.table[k - 1] == 1.0:
            k -= 1
        return k

    def _check(self, i: int) -> None:
        if i < 1:
            raise IndexError(f"weight index must be >= 1, got {i}")
        if self.length is not None and i > self.length:
            raise WeightTableExhausted(i)

    # -- values -----------------------------------------------------------
    def weight_at(self, i: int) -> float:
        """``w_i``."""
        self._check(i)
        if self.family == UNIFORM:
            return 1.0
        if self.family == HOPPE:
            return self.theta if i == 1 else 1.0
        if self.family == THETA_K:
            return self.theta if i <= self.k else 1.0
        if self.family == POWER:
            return float(i) ** self.a
        if i <= len(self.table):
            return float(self.table[i - 1])
        return 1.0

    def weights(self, m: int) -> np.ndarray:
        """``w_1..w_m`` as a float array."""
        if m <= 0:
            return np.empty(0, dtype=np.float64)
        self._check(m)
        if self.family == UNIFORM:
            return np.ones(m)
        if self.family == HOPPE:
            w = np.ones(m)
            w[0] = self.theta
            return w
        if self.family == THETA_K:
            w = np.ones(m)
            w[: self.k] = self.theta
            return w
        if self.family == POWER:
            return np.arange(1, m + 1, dtype=np.float64) ** self.a
        w = np.ones(m)
        t = min(m, len(self.table))
        w[:t] = self.table[:t]
        return w

    def _closed_prefix(self, m: int) -> Optional[np.ndarray]:
        i = np.arange(1, m + 1, dtype=np.float64)
        if self.family == UNIFORM:
            return i
        if self.family == HOPPE:
            return self.theta + (i - 1.0)
        if self.family == THETA_K:
            return np.where(i <= self.k, self.theta * i, self.theta * self.k + (i - self.k))
        return None

    def prefix_sums(self, m: int) -> np.ndarray:
        """Read-only array ``[S(1), ..., S(m)]``."""
        if m <= 0:
            return np.empty(0, dtype=np.float64)
        self._check(m)
        table = self._prefix
        if table.shape[0] >= m:
            return table[:m]
        with self._lock:
            if self._prefix.shape[0] < m:
                size = max(m, 2 * self._prefix.shape[0])
                if self.length is not None:
                    size = min(size, self.length)
                closed = self._closed_prefix(size)
                fresh = closed if closed is not None else compensated_cumsum(self.weights(size))
                fresh.setflags(write=False)
                self._prefix = fresh
            return self._prefix[:m]

    def prefix_sum(self, i: int) -> float:
        """``S(i) = w_1 + ... + w_i``."""
        self._check(i)
        return float(self.prefix_sums(i)[i - 1])

    # -- exact rationals for the enumeration oracle -------------------------
    def exact_weight(self, i: int) -> Fraction:
        """``w_i`` as a Fraction.

        Floats are converted exactly (binary value); ``power`` requires an
        integer exponent.
        """
        self._check(i)
        if self.family == UNIFORM:
            return Fraction(1)
        if self.family == HOPPE:
            return Fraction(self.theta) if i == 1 else Fraction(1)
        if self.family == THETA_K:
            return Fraction(self.theta) if i <= self.k else Fraction(1)
        if self.family == POWER:
            if self.a != int(self.a):
                raise ValueError("exact weights need an integer exponent")
            return Fraction(i) ** int(self.a)
        if i <= len(self.exact_table):
            return self.exact_table[i - 1]
        return Fraction(1)

    def exact_prefix_sum(self, i: int) -> Fraction:
        return sum((self.exact_weight(j) for j in range(1, i + 1)), Fraction(0))


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def parse_family(text: str) -> WeightSequence:
    """Parse ``uniform``, ``hoppe:<θ>``, ``thetak:<θ>,<k>``, ``power:<a>``,
    ``custom:<path>`` or ``wrt:<w1>,...,<wk>`` (weights followed by ones)."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == UNIFORM and not arg:
            return WeightSequence.uniform()
        if name == HOPPE:
            return WeightSequence.hoppe(float(arg))
        if name == THETA_K:
            theta, k = arg.split(",")
            if float(k) != int(float(k)):
                raise ValueError(f"k must be an integer, got {k!r}")
            return WeightSequence.theta_k(float(theta), int(float(k)))
        if name == POWER:
            return WeightSequence.power(float(arg))
        if name == CUSTOM and arg:
            return WeightSequence.from_file(arg)
        if name == "wrt" and arg:
            return WeightSequence.eventually_one(Fraction(x.strip()) for x in arg.split(","))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid family spec {text!r}: {exc}") from None
    raise ValueError(f"invalid family spec {text!r}")
