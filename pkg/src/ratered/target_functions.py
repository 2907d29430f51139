"""Truth tables for the function the sink must compute.

A function is stored explicitly as a total map from input tuples to output
symbols.  The central predicate here is zero-message computability: a pmf
needs no communication at all exactly when the function is constant on the
product support of the marginals, i.e. the function output has zero entropy.
Constancy is decided by scanning the (at most 2^m) support tuples, which is
exact and independent of floating-point entropy.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .probability import ProductPmf

BUILTIN_NAMES = ("min", "max", "and", "or", "parity", "constant")


@dataclass(frozen=True)
class FunctionTable:
    """Explicit truth table f: X_1 x ... x X_m -> Z."""

    m: int
    alphabet_sizes: tuple[int, ...]
    output_alphabet: tuple[int, ...]
    table: dict[tuple[int, ...], int]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConfigError(f"arity must be >= 1, got {self.m}")
        if len(self.alphabet_sizes) != self.m:
            raise ConfigError("alphabet_sizes length must equal arity")
        expected = 1
        for a in self.alphabet_sizes:
            expected *= a
        if len(self.table) != expected:
            raise ConfigError(
                f"non-total table: {len(self.table)} entries, expected {expected}"
            )
        outputs = set(self.output_alphabet)
        for x, z in self.table.items():
            if len(x) != self.m:
                raise ConfigError(f"input tuple {x} has wrong arity")
            for xi, a in zip(x, self.alphabet_sizes):
                if not 0 <= xi < a:
                    raise ConfigError(f"input symbol out of range in {x}")
            if z not in outputs:
                raise ConfigError(f"output {z} for {x} not in output alphabet")

    def __call__(self, x: tuple[int, ...]) -> int:
        return self.table[x]

    def is_constant(self) -> bool:
        return len(set(self.table.values())) <= 1


def builtin_table(name: str, m: int) -> FunctionTable:
    """One of the built-in binary functions over m sources.

    min == and and max == or on {0,1}; both spellings are kept because the
    m-ary min/max generalize beyond binary alphabets later.  "constant" is
    the all-zeros function (useful as a degenerate smoke case).
    """
    if m < 2:
        raise ConfigError(f"builtin functions need m >= 2, got {m}")
    key = name.lower()
    if key in ("min", "and"):
        fn = min
    elif key in ("max", "or"):
        fn = max
    elif key == "parity":
        fn = lambda x: sum(x) % 2  # noqa: E731
    elif key == "constant":
        fn = lambda x: 0  # noqa: E731
    else:
        raise ConfigError(
            f"unknown builtin function {name!r}; choose from {BUILTIN_NAMES}"
        )
    table = {}
    for x in itertools.product((0, 1), repeat=m):
        table[x] = int(fn(x))
    outputs = tuple(sorted(set(table.values())))
    return FunctionTable(
        m=m,
        alphabet_sizes=(2,) * m,
        output_alphabet=outputs,
        table=table,
    )


def computable_with_zero_messages(f: FunctionTable, pmf: ProductPmf) -> bool:
    """True iff f is almost surely constant under pmf.

    Equivalent to H(f(X^m)) = 0.  The product support is read off the exact
    zeros of the marginal parameters, so the answer is exact on grid pmfs.
    """
    if pmf.m != f.m:
        raise ValueError(f"pmf arity {pmf.m} != function arity {f.m}")
    supports = [pmf.support(j) for j in range(f.m)]
    it = itertools.product(*supports)
    first = f(next(it))
    return all(f(x) == first for x in it)


def load_table(path: str | Path) -> FunctionTable:
    """Parse a truth-table file.

    Format: a header line `arity m=3 alphabets=2,2,2 outputs=0,1`, then one
    record per line `x1 x2 ... xm -> z` with integer symbols; `#` starts a
    comment; blank lines are ignored.
    """
    path = Path(path)
    lines = []
    for raw_no, raw in enumerate(path.read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            lines.append((raw_no, text))
    if not lines:
        raise ConfigError(f"{path}: empty table file")

    header_no, header = lines[0]
    fields = dict()
    parts = header.split()
    if not parts or parts[0] != "arity":
        raise ConfigError(f"{path}:{header_no}: header must start with 'arity'")
    for part in parts[1:]:
        if "=" not in part:
            raise ConfigError(f"{path}:{header_no}: bad header field {part!r}")
        key, value = part.split("=", 1)
        fields[key] = value
    try:
        m = int(fields["m"])
        alphabet_sizes = tuple(int(a) for a in fields["alphabets"].split(","))
        outputs = tuple(int(z) for z in fields["outputs"].split(","))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}:{header_no}: malformed header: {exc}") from exc

    table: dict[tuple[int, ...], int] = {}
    for line_no, text in lines[1:]:
        tokens = text.split()
        if len(tokens) != m + 2 or tokens[m] != "->":
            raise ConfigError(
                f"{path}:{line_no}: expected '{m} symbols -> z', got {text!r}"
            )
        try:
            x = tuple(int(t) for t in tokens[:m])
            z = int(tokens[m + 1])
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: non-integer symbol") from exc
        if x in table:
            raise ConfigError(f"{path}:{line_no}: duplicate entry for {x}")
        table[x] = z

    expected = 1
    for a in alphabet_sizes:
        expected *= a
    if len(table) != expected:
        missing = [
            x
            for x in itertools.product(*(range(a) for a in alphabet_sizes))
            if x not in table
        ]
        raise ConfigError(
            f"{path}: non-total table, missing {len(missing)} rows, "
            f"first missing {missing[0] if missing else '?'}"
        )
    return FunctionTable(
        m=m, alphabet_sizes=alphabet_sizes, output_alphabet=outputs, table=table
    )
