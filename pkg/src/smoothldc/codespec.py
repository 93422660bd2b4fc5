"""Linear code specifications and their on-disk document format.

A ``LinearCodeSpec`` is a complete description of a binary linear locally
decodable code: parameters, one generator matrix per coded symbol (rows are
the symbol's bit equations over the K*Lw message-bit columns), the decoding
supersets, and an optional group id per symbol for N-partite codes.

The document format is self-describing JSON:

    version, params {N,K,M,Lw,Lx}, column_order, symbols = [{digits, group,
    zero_row, rows: [hex MSB-first, ...]}, ...], supersets = [[sorted symbol
    index lists], ...] per source symbol, optional databases section,
    content_hash = SHA-256 over the canonical serialization.

The canonical serialization (sorted keys, no whitespace) makes the hash and
the written bytes platform-stable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

from .capacity import CodeParams
from .gf2 import BitMatrix, BitVector

DOCUMENT_VERSION = 1

# Column layout descriptors. Constructed codes order message columns as:
# message k ascending, then sub-source-symbol gamma in lexicographic order
# (gamma_1 most significant), then bit index 1..N-1. Transcribed codes keep
# their published per-message bit order.
COLUMN_ORDER_CANONICAL = "msg-major/gamma-lex/bit-asc"
COLUMN_ORDER_TRANSCRIBED = "msg-major/bit-asc"


class CodeSpecError(ValueError):
    """Structurally invalid code specification or document."""


@dataclass(frozen=True)
class DecodingSuperset:
    """The family of decoding sets for one source symbol.

    Sets are stored as sorted tuples of coded-symbol indices in a stable
    enumeration order; every set has exactly N members.
    """

    k: int  # 1-based source-symbol index
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.sets:
            raise CodeSpecError(f"superset for source symbol {self.k} is empty")

    def __len__(self) -> int:
        return len(self.sets)


class LinearCodeSpec:
    """Immutable description of a linear LDC over GF(2).

    symbol_gens[m] may contain all-zero rows (sub-symbols that are constant
    zero and never transmitted); the number of nonzero rows must equal Lx,
    so every symbol carries exactly Lx stored bits.
    """

    def __init__(
        self,
        params: CodeParams,
        symbol_gens: Sequence[BitMatrix],
        supersets: Sequence[DecodingSuperset],
        groups: Sequence[int] | None = None,
        digits: Sequence[tuple[int, ...]] | None = None,
        labels: Sequence[str] | None = None,
        column_order: str = COLUMN_ORDER_TRANSCRIBED,
    ):
        self.params = params
        self.symbol_gens = tuple(symbol_gens)
        self.supersets = tuple(supersets)
        self.groups = tuple(groups) if groups is not None else None
        self.digits = tuple(digits) if digits is not None else None
        self.labels = tuple(labels) if labels is not None else None
        self.column_order = column_order
        self._validate()

    def _validate(self) -> None:
        p = self.params
        if len(self.symbol_gens) != p.M:
            raise CodeSpecError(f"expected {p.M} symbol matrices, got {len(self.symbol_gens)}")
        width = p.K * p.Lw
        for m, gen in enumerate(self.symbol_gens):
            if gen.cols != width:
                raise CodeSpecError(f"symbol {m}: {gen.cols} columns, expected K*Lw = {width}")
            nonzero = sum(not gen.row_is_zero(r) for r in range(gen.rows))
            if nonzero != p.Lx:
                raise CodeSpecError(f"symbol {m}: {nonzero} nonzero rows, expected Lx = {p.Lx}")
        if len(self.supersets) != p.K:
            raise CodeSpecError(f"expected {p.K} decoding supersets, got {len(self.supersets)}")
        for idx, sup in enumerate(self.supersets, start=1):
            if sup.k != idx:
                raise CodeSpecError(f"superset {idx} is labeled k={sup.k}")
            for s in sup.sets:
                if len(s) != p.N or len(set(s)) != p.N:
                    raise CodeSpecError(f"decoding set {s} for k={idx} must have {p.N} distinct members")
                if s != tuple(sorted(s)) or s[0] < 0 or s[-1] >= p.M:
                    raise CodeSpecError(f"decoding set {s} for k={idx} must be sorted and within [0, {p.M})")
        if self.groups is not None:
            if len(self.groups) != p.M:
                raise CodeSpecError("groups must assign one id per coded symbol")
            for sup in self.supersets:
                for s in sup.sets:
                    seen = [self.groups[i] for i in s]
                    if len(set(seen)) != p.N:
                        raise CodeSpecError(
                            f"decoding set {s} is not a group transversal (groups {seen})"
                        )

    # transcribed codes keep their X1..XM labels so reports read naturally
    def label(self, m: int) -> str:
        if self.labels is not None:
            return self.labels[m]
        if self.digits is not None:
            return "X_" + "".join(str(d) for d in self.digits[m])
        return f"X{m + 1}"

    def zero_row(self, m: int) -> int | None:
        gen = self.symbol_gens[m]
        for r in range(gen.rows):
            if gen.row_is_zero(r):
                return r
        return None

    def message_columns(self, k: int) -> range:
        """Column range of source symbol k (1-based) in the message layout."""
        if not 1 <= k <= self.params.K:
            raise IndexError(f"source symbol index {k} out of [1, {self.params.K}]")
        return range((k - 1) * self.params.Lw, k * self.params.Lw)


def canonical_json(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def content_hash(doc: dict) -> str:
    body = {key: value for key, value in doc.items() if key != "content_hash"}
    return hashlib.sha256(canonical_json(body)).hexdigest()


def to_document(code: LinearCodeSpec, databases: Sequence[Sequence[int]] | None = None) -> dict:
    """Serialize a code (plus optional per-database answer lists) to a
    hash-stamped JSON-ready dict."""
    p = code.params
    row_bytes = -(-p.K * p.Lw // 8)
    symbols = []
    for m, gen in enumerate(code.symbol_gens):
        symbols.append(
            {
                "digits": list(code.digits[m]) if code.digits is not None else None,
                "group": code.groups[m] if code.groups is not None else None,
                "label": code.label(m),
                "zero_row": code.zero_row(m),
                "rows": [gen.row(r).to_bytes().hex().zfill(row_bytes * 2) for r in range(gen.rows)],
            }
        )
    doc = {
        "version": DOCUMENT_VERSION,
        "params": {"N": p.N, "K": p.K, "M": p.M, "Lw": p.Lw, "Lx": p.Lx},
        "column_order": code.column_order,
        "symbols": symbols,
        "supersets": [[list(s) for s in sup.sets] for sup in code.supersets],
    }
    if databases is not None:
        doc["databases"] = [list(db) for db in databases]
    doc["content_hash"] = content_hash(doc)
    return doc


def from_document(doc: dict) -> LinearCodeSpec:
    """Reconstruct a code from a document, verifying its content hash."""
    try:
        version = doc["version"]
        if version != DOCUMENT_VERSION:
            raise CodeSpecError(f"unsupported document version {version}")
        stated = doc.get("content_hash")
        if stated is not None and stated != content_hash(doc):
            raise CodeSpecError("content_hash does not match document body")
        pd = doc["params"]
        params = CodeParams(N=pd["N"], K=pd["K"], M=pd["M"], Lw=pd["Lw"], Lx=pd["Lx"])
        width = params.K * params.Lw
        gens, groups, digits, labels = [], [], [], []
        for sym in doc["symbols"]:
            rows = [BitVector.from_hex(h, width) for h in sym["rows"]]
            gens.append(BitMatrix.from_rows(rows) if rows else BitMatrix.zeros(0, width))
            groups.append(sym.get("group"))
            digits.append(tuple(sym["digits"]) if sym.get("digits") is not None else None)
            labels.append(sym.get("label"))
        supersets = tuple(
            DecodingSuperset(k=i + 1, sets=tuple(tuple(sorted(s)) for s in sets))
            for i, sets in enumerate(doc["supersets"])
        )
    except KeyError as exc:
        raise CodeSpecError(f"document is missing field {exc}") from exc
    has_groups = all(g is not None for g in groups)
    has_digits = all(d is not None for d in digits)
    has_labels = all(lb is not None for lb in labels)
    return LinearCodeSpec(
        params=params,
        symbol_gens=gens,
        supersets=supersets,
        groups=groups if has_groups else None,
        digits=digits if has_digits else None,
        labels=labels if has_labels else None,
        column_order=doc.get("column_order", COLUMN_ORDER_TRANSCRIBED),
    )


def dump_document(doc: dict) -> bytes:
    """Stable, human-readable rendering for files; hash covers the canonical
    form, not this indented one."""
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def load_document(data: bytes) -> dict:
    return json.loads(data.decode("utf-8"))
