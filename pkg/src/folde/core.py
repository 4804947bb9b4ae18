"""Domain types and file ingestion: variants, datasets, embeddings, log-prob matrices.

Text formats are tab-separated and self-describing (the amino-acid alphabet is
declared in every header). The embedding container is a little-endian binary
with magic ``FLDE1``; see the README for byte-level layouts.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
AA_INDEX = {aa: i for i, aa in enumerate(ALPHABET)}

EMBEDDING_MAGIC = b"FLDE1"


class ParseError(ValueError):
    """Malformed variant notation or text file contents."""


class FileFormatError(ValueError):
    """Corrupt or mismatched binary/tabular container."""


@dataclass(frozen=True, order=True)
class Mutation:
    """A single point substitution at a 1-based residue position."""

    position: int
    from_aa: str
    to_aa: str

    def __post_init__(self):
        if self.position < 1:
            raise ParseError(f"position must be >= 1, got {self.position}")
        if self.from_aa not in AA_INDEX:
            raise ParseError(f"unknown amino acid {self.from_aa!r}")
        if self.to_aa not in AA_INDEX:
            raise ParseError(f"unknown amino acid {self.to_aa!r}")
        if self.from_aa == self.to_aa:
            raise ParseError(f"synonymous mutation {self.from_aa}{self.position}{self.to_aa}")

    def render(self) -> str:
        return f"{self.from_aa}{self.position}{self.to_aa}"


@dataclass(frozen=True)
class Variant:
    """An ordered set of point mutations relative to a reference sequence.

    The empty set denotes the wild type. At most one mutation per position;
    mutations are kept sorted by position so equal variants hash equally.
    """

    mutations: tuple[Mutation, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.mutations, key=lambda m: m.position))
        positions = [m.position for m in ordered]
        if len(set(positions)) != len(positions):
            raise ParseError(f"duplicate mutated position in {ordered}")
        object.__setattr__(self, "mutations", ordered)

    @property
    def is_wild_type(self) -> bool:
        return not self.mutations

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(m.position for m in self.mutations)

    def sort_key(self) -> tuple:
        """Deterministic tie-break ordering: position, then replacement letter."""
        return tuple((m.position, m.to_aa) for m in self.mutations)

    def render(self) -> str:
        if not self.mutations:
            return "WT"
        return ":".join(m.render() for m in self.mutations)

    def apply(self, reference: str) -> str:
        """Mutated amino-acid sequence."""
        seq = list(reference)
        for m in self.mutations:
            if m.position > len(reference):
                raise ParseError(f"{m.render()} beyond reference length {len(reference)}")
            if seq[m.position - 1] != m.from_aa:
                raise ParseError(
                    f"{m.render()} inconsistent with reference "
                    f"({reference[m.position - 1]} at {m.position})"
                )
            seq[m.position - 1] = m.to_aa
        return "".join(seq)

    def __str__(self) -> str:
        return self.render()


def parse_variant(text: str, reference: str | None = None) -> Variant:
    """Parse ``"WT"`` or colon-joined tokens like ``"A23T:G56S"``.

    When a reference sequence is given, each token's original letter and
    position are checked against it.
    """
    text = text.strip()
    if not text:
        raise ParseError("empty variant string")
    if text == "WT":
        return Variant()
    mutations = []
    for token in text.split(":"):
        if len(token) < 3 or token[0] not in AA_INDEX or token[-1] not in AA_INDEX:
            raise ParseError(f"malformed mutation token {token!r}")
        try:
            position = int(token[1:-1])
        except ValueError:
            raise ParseError(f"malformed mutation token {token!r}") from None
        mutations.append(Mutation(position, token[0], token[-1]))
    variant = Variant(tuple(mutations))
    if reference is not None:
        for m in variant.mutations:
            if m.position > len(reference):
                raise ParseError(
                    f"{m.render()} beyond reference length {len(reference)}"
                )
            if reference[m.position - 1] != m.from_aa:
                raise ParseError(
                    f"{m.render()} inconsistent with reference "
                    f"({reference[m.position - 1]} at {m.position})"
                )
    return variant


def validate_reference(reference: str) -> str:
    reference = reference.strip()
    if not reference:
        raise ParseError("empty reference sequence")
    bad = set(reference) - set(ALPHABET)
    if bad:
        raise ParseError(f"reference contains non-canonical letters {sorted(bad)}")
    return reference


@dataclass
class Dataset:
    """A reference sequence plus measured (variant, activity) records."""

    reference_sequence: str
    records: list[tuple[Variant, float]]

    def __post_init__(self):
        self.reference_sequence = validate_reference(self.reference_sequence)
        if len(self.records) < 2:
            raise ParseError(f"dataset needs at least 2 records, got {len(self.records)}")
        seen = set()
        for variant, activity in self.records:
            if variant in seen:
                raise ParseError(f"duplicate variant {variant}")
            seen.add(variant)
            variant.apply(self.reference_sequence)  # raises on inconsistency
            if not math.isfinite(activity):
                raise ParseError(f"non-finite activity for {variant}")

    @property
    def variants(self) -> list[Variant]:
        return [v for v, _ in self.records]

    @property
    def activities(self) -> np.ndarray:
        return np.array([a for _, a in self.records], dtype=np.float64)

    def activity_map(self) -> dict[Variant, float]:
        return {v: a for v, a in self.records}


def load_dataset(path) -> Dataset:
    """Read a dataset TSV: ``#ref=<sequence>`` comment, ``mutant\\tactivity`` header, rows."""
    reference = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            if ln.startswith("#ref="):
                reference = ln[len("#ref="):].strip()
            continue
        if ln.strip():
            body.append(ln)
    if reference is None:
        raise FileFormatError(f"{path}: missing '#ref=<sequence>' comment line")
    if not body or body[0].split("\t")[:2] != ["mutant", "activity"]:
        raise FileFormatError(f"{path}: missing 'mutant\\tactivity' header")
    for ln in body[1:]:
        parts = ln.split("\t")
        if len(parts) < 2:
            raise FileFormatError(f"{path}: short row {ln!r}")
        variant = parse_variant(parts[0], reference)
        try:
            activity = float(parts[1])
        except ValueError:
            raise FileFormatError(f"{path}: unparseable activity {parts[1]!r}") from None
        rows.append((variant, activity))
    return Dataset(reference, rows)


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#ref={dataset.reference_sequence}\n")
        fh.write("mutant\tactivity\n")
        for variant, activity in dataset.records:
            fh.write(f"{variant.render()}\t{activity!r}\n")


@dataclass
class EmbeddingStore:
    """Fixed-width float32 vectors keyed by variant."""

    dim: int
    rows: dict[Variant, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise FileFormatError(f"embedding dim must be positive, got {self.dim}")
        for variant, vec in self.rows.items():
            self.rows[variant] = self._check(variant, vec)

    def _check(self, variant: Variant, vec) -> np.ndarray:
        arr = np.asarray(vec, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise FileFormatError(
                f"embedding for {variant} has shape {arr.shape}, expected ({self.dim},)"
            )
        if not np.all(np.isfinite(arr)):
            raise FileFormatError(f"non-finite embedding value for {variant}")
        return arr

    def add(self, variant: Variant, vec) -> None:
        self.rows[variant] = self._check(variant, vec)

    def __contains__(self, variant: Variant) -> bool:
        return variant in self.rows

    def __len__(self) -> int:
        return len(self.rows)

    def matrix(self, variants: list[Variant]) -> np.ndarray:
        """Stack embeddings for the given variants; raises KeyError on a missing row."""
        missing = [v for v in variants if v not in self.rows]
        if missing:
            raise KeyError(f"missing embedding for {missing[0]} (+{len(missing) - 1} more)")
        return np.stack([self.rows[v] for v in variants]).astype(np.float64)


def save_embeddings(store: EmbeddingStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<II", len(store.rows), store.dim))
        for variant, vec in store.rows.items():
            ident = variant.render().encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(vec.astype("<f4").tobytes())


def load_embeddings(path) -> EmbeddingStore:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:5] != EMBEDDING_MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:5]!r}")
    offset = 5
    if len(blob) < offset + 8:
        raise FileFormatError(f"{path}: truncated header")
    count, dim = struct.unpack_from("<II", blob, offset)
    offset += 8
    store = EmbeddingStore(dim=dim)
    vec_bytes = 4 * dim
    for _ in range(count):
        if len(blob) < offset + 2:
            raise FileFormatError(f"{path}: truncated record header")
        (id_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        if len(blob) < offset + id_len + vec_bytes:
            raise FileFormatError(f"{path}: truncated record")
        ident = blob[offset:offset + id_len].decode("utf-8")
        offset += id_len
        vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset).copy()
        offset += vec_bytes
        store.add(parse_variant(ident), vec)
    if offset != len(blob):
        raise FileFormatError(f"{path}: {len(blob) - offset} trailing bytes")
    return store


ROW_NORMALIZATION_TOL = 1e-3


@dataclass
class LogProbMatrix:
    """Per-position natural-log probabilities over the 20 amino acids.

    Rows are normalized distributions: log-sum-exp of each row must be within
    1e-3 of zero, and every entry must be <= 0 and finite.
    """

    values: np.ndarray  # (length, 20) float64

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(ALPHABET):
            raise FileFormatError(f"log-prob matrix must be (length, 20), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise FileFormatError("non-finite log-probability entry")
        if np.any(arr > 0):
            pos = np.argwhere(arr > 0)[0]
            raise FileFormatError(f"positive log probability at row {pos[0] + 1}")
        lse = _logsumexp_rows(arr)
        worst = np.max(np.abs(lse))
        if worst > ROW_NORMALIZATION_TOL:
            row = int(np.argmax(np.abs(lse)))
            raise FileFormatError(
                f"row {row + 1} not normalized: log-sum-exp {lse[row]:.6f}"
            )
        self.values = arr

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def logprob(self, position: int, aa: str) -> float:
        if not 1 <= position <= self.length:
            raise IndexError(f"position {position} outside 1..{self.length}")
        return float(self.values[position - 1, AA_INDEX[aa]])


def _logsumexp_rows(arr: np.ndarray) -> np.ndarray:
    m = arr.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(arr - m).sum(axis=1, keepdims=True))).ravel()


def load_logprobs(path, reference: str | None = None) -> LogProbMatrix:
    """Read a log-prob TSV: header of the 20 amino-acid letters, one row per position."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split("\t")
    if sorted(header) != sorted(ALPHABET):
        raise FileFormatError(f"{path}: header must be the 20 amino-acid letters")
    col_of = [header.index(aa) for aa in ALPHABET]
    rows = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != len(ALPHABET):
            raise FileFormatError(f"{path}: row with {len(parts)} columns")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise FileFormatError(f"{path}: unparseable value in row {ln!r}") from None
        rows.append([vals[c] for c in col_of])
    matrix = LogProbMatrix(np.array(rows, dtype=np.float64))
    if reference is not None and matrix.length != len(reference):
        raise FileFormatError(
            f"{path}: {matrix.length} rows but reference length {len(reference)}"
        )
    return matrix


def save_logprobs(matrix: LogProbMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(ALPHABET) + "\n")
        for row in matrix.values:
            fh.write("\t".join(repr(float(x)) for x in row) + "\n")


def all_single_mutants(reference: str) -> list[Variant]:
    """The 19*L single mutants of a reference, ordered by position then letter."""
    reference = validate_reference(reference)
    singles = []
    for pos, ref_aa in enumerate(reference, start=1):
        for aa in ALPHABET:
            if aa != ref_aa:
                singles.append(Variant((Mutation(pos, ref_aa, aa),)))
    return singles
