"""Instrument schemas, rating-data ingestion, rating matrices and descriptives.

Ratings live in a :class:`RatingDataset` as immutable long-form records. The
analysis modules never see records directly; they consume a
:class:`RatingMatrix` (subjects x raters, NaN for missing cells) produced by
:func:`build_matrix`.
"""

from __future__ import annotations

import csv
import io
import math
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import SchemaError, ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCALE_KINDS = ("likert", "binary", "continuous")
LONG_COLUMNS = ("subject_id", "rater_id", "attribute", "value")
LONG_OPTIONAL = ("gate_answer", "duration_min")
GATE_SUFFIX = ".gate"

_TRUE = {"1", "true", "yes", "y", "t"}
_FALSE = {"0", "false", "no", "n", "f"}


# --------------------------------------------------------------------------
# schema
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Scale:
    """Response scale of one attribute.

    ``likert`` scales are integer-valued on ``[min, max]``; ``binary`` scales
    are coded ``{0, 1}``; ``continuous`` scales (simulated latent scores)
    accept any finite number.
    """

    kind: str
    min: int | None = None
    max: int | None = None

    def __post_init__(self):
        if self.kind not in SCALE_KINDS:
            raise SchemaError(f"unknown scale kind {self.kind!r}")
        if self.kind == "binary":
            object.__setattr__(self, "min", 0)
            object.__setattr__(self, "max", 1)
        elif self.kind == "likert":
            if not (_is_int(self.min) and _is_int(self.max)) or self.min >= self.max:
                raise SchemaError(
                    f"invalid bounds: likert scale needs integer min < max, "
                    f"got min={self.min!r}, max={self.max!r}"
                )

    @property
    def discrete(self) -> bool:
        return self.kind != "continuous"

    @property
    def levels(self) -> tuple[int, ...]:
        if not self.discrete:
            raise ValueError("continuous scales have no discrete levels")
        return tuple(range(self.min, self.max + 1))

    def check(self, value: float) -> None:
        """Raise ``ValueError`` with a readable message if ``value`` is not on the scale."""
        if not math.isfinite(value):
            raise ValueError(f"non-finite score {value!r}")
        if self.discrete:
            if value != int(value):
                raise ValueError(f"fractional score {value!r} on a discrete scale")
            if not self.min <= value <= self.max:
                raise ValueError(f"score {value:g} outside bounds [{self.min}, {self.max}]")

    def to_dict(self) -> dict:
        if self.kind == "likert":
            return {"kind": "likert", "min": self.min, "max": self.max}
        return {"kind": self.kind}


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    scale: Scale
    definition: str = ""
    gate: str | None = None
    parts: tuple[str, ...] = ()

    @property
    def rating_keys(self) -> tuple[str, ...]:
        """Attribute labels that appear in rating data.

        An attribute with ``parts`` is rated once per part under
        ``"<name>_<part>"``; otherwise its own name is the key.
        """
        if not self.parts:
            return (self.name,)
        return tuple(f"{self.name}_{p}" for p in self.parts)


@dataclass(frozen=True)
class InstrumentSchema:
    name: str
    attributes: tuple[AttributeSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not self.attributes:
            raise SchemaError("empty instrument: at least one attribute is required")
        seen: set[str] = set()
        for attr in self.attributes:
            if not attr.name or not attr.name.strip():
                raise SchemaError("attribute names must be non-empty")
            labels = {attr.name, *attr.rating_keys}
            if labels & seen:
                raise SchemaError(f"duplicate attribute {attr.name!r}")
            seen |= labels
        object.__setattr__(self, "_by_key", {k: a for a in self.attributes for k in a.rating_keys})

    @property
    def rating_keys(self) -> tuple[str, ...]:
        return tuple(k for a in self.attributes for k in a.rating_keys)

    def keys_of_kind(self, kind: str) -> tuple[str, ...]:
        return tuple(k for k in self.rating_keys if self.scale_for(k).kind == kind)

    def attribute_for(self, key: str) -> AttributeSpec:
        try:
            return self._by_key[key]
        except KeyError:
            raise ValidationError(f"unknown attribute {key!r}") from None

    def scale_for(self, key: str) -> Scale:
        return self.attribute_for(key).scale

    def __contains__(self, key: str) -> bool:
        return key in self._by_key

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "attributes": [
                {
                    "name": a.name,
                    "scale": a.scale.to_dict(),
                    "definition": a.definition,
                    "gate": a.gate,
                    "parts": list(a.parts),
                }
                for a in self.attributes
            ],
        }


def load_instrument(document: str | bytes) -> InstrumentSchema:
    """Parse a TOML instrument document (grammar in ``data/pdsqi9.toml``)."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = tomllib.loads(document)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"instrument document does not parse: {exc}") from exc

    entries = doc.get("attribute", [])
    if not isinstance(entries, list):
        raise SchemaError("'attribute' must be an array of tables")
    attributes = []
    for i, entry in enumerate(entries):
        if "name" not in entry or "scale" not in entry:
            raise SchemaError(f"attribute #{i + 1} needs 'name' and 'scale'")
        kind = entry["scale"]
        if kind not in SCALE_KINDS:
            raise SchemaError(f"unknown scale kind {kind!r} for attribute {entry['name']!r}")
        if kind == "likert":
            scale = Scale("likert", entry.get("min"), entry.get("max"))
        else:
            scale = Scale(kind)
        parts = entry.get("parts", [])
        if not isinstance(parts, list) or not all(isinstance(p, str) and p for p in parts):
            raise SchemaError(f"'parts' of {entry['name']!r} must be a list of names")
        attributes.append(
            AttributeSpec(
                name=str(entry["name"]),
                scale=scale,
                definition=str(entry.get("definition", "")),
                gate=entry.get("gate"),
                parts=tuple(parts),
            )
        )
    return InstrumentSchema(name=str(doc.get("name", "instrument")), attributes=tuple(attributes))


def default_instrument() -> InstrumentSchema:
    """The bundled nine-attribute PDSQI-9 instrument."""
    text = resources.files("ratingstats").joinpath("data/pdsqi9.toml").read_text("utf-8")
    return load_instrument(text)


def single_attribute_schema(attribute: str = "score", scale: Scale | None = None) -> InstrumentSchema:
    return InstrumentSchema("ad-hoc", (AttributeSpec(attribute, scale or Scale("likert", 1, 5)),))


# --------------------------------------------------------------------------
# records and datasets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RatingRecord:
    subject_id: str
    rater_id: str
    attribute: str
    value: float | None
    gate_answer: bool | None = None
    duration: float | None = None


@dataclass(frozen=True)
class RatingDataset:
    """Validated, immutable collection of rating records.

    ``value`` is ``None`` only for records whose gate question was answered
    "no"; those carry the gate answer but never enter rating matrices.
    """

    schema: InstrumentSchema
    records: tuple[RatingRecord, ...]
    covariates: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        seen = set()
        for rec in self.records:
            _validate_record(self.schema, rec)
            key = (rec.subject_id, rec.rater_id, rec.attribute)
            if key in seen:
                raise ValidationError(
                    f"duplicate record for subject {rec.subject_id!r}, rater "
                    f"{rec.rater_id!r}, attribute {rec.attribute!r}"
                )
            seen.add(key)
        cov = {str(s): MappingProxyType(dict(v)) for s, v in self.covariates.items()}
        object.__setattr__(self, "covariates", MappingProxyType(cov))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.subject_id for r in self.records}))

    @property
    def rater_ids(self) -> tuple[str, ...]:
        return tuple(sorted({r.rater_id for r in self.records}))

    @property
    def attributes(self) -> tuple[str, ...]:
        """Rating keys present in the data, in schema order."""
        present = {r.attribute for r in self.records}
        return tuple(k for k in self.schema.rating_keys if k in present)

    @property
    def covariate_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for values in self.covariates.values():
            for name in values:
                if name not in names:
                    names.append(name)
        return tuple(names)

    def values(self, attribute: str) -> np.ndarray:
        return np.array(
            [r.value for r in self.records if r.attribute == attribute and r.value is not None],
            dtype=float,
        )

    def with_covariates(self, covariates: Mapping[str, Mapping[str, float]]) -> "RatingDataset":
        return RatingDataset(self.schema, self.records, covariates)

    def subset(self, subject_ids: Iterable[str]) -> "RatingDataset":
        keep = set(subject_ids)
        return RatingDataset(
            self.schema,
            tuple(r for r in self.records if r.subject_id in keep),
            {s: v for s, v in self.covariates.items() if s in keep},
        )


def _validate_record(schema: InstrumentSchema, rec: RatingRecord) -> None:
    attr = schema.attribute_for(rec.attribute)
    if not rec.subject_id or not rec.rater_id:
        raise ValidationError("subject_id and rater_id must be non-empty")
    if rec.value is None:
        if rec.gate_answer is not False:
            raise ValidationError(
                f"missing value for {rec.attribute!r} (subject {rec.subject_id!r}) "
                "is only allowed when the gate answer is 'no'"
            )
        return
    if rec.gate_answer is not None and attr.gate is None:
        raise ValidationError(f"attribute {rec.attribute!r} has no gate question")
    try:
        attr.scale.check(rec.value)
    except ValueError as exc:
        raise ValidationError(f"{rec.attribute!r}: {exc}") from None


# --------------------------------------------------------------------------
# CSV ingestion
# --------------------------------------------------------------------------


def _parse_number(text: str, what: str, row: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"row {row}: unparseable numeric {what} {text!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"row {row}: non-finite {what} {text!r}")
    return value


def _parse_bool(text: str, row: int) -> bool | None:
    t = text.strip().lower()
    if not t:
        return None
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValidationError(f"row {row}: unparseable gate answer {text!r}")


def _score(schema: InstrumentSchema, attribute: str, text: str, row: int) -> float | int:
    scale = schema.scale_for(attribute)
    value = _parse_number(text, "score", row)
    try:
        scale.check(value)
    except ValueError as exc:
        raise ValidationError(f"row {row}, attribute {attribute!r}: {exc}") from None
    return int(value) if scale.discrete else value


def parse_ratings(
    stream: TextIO | str,
    schema: InstrumentSchema,
    layout: str = "long",
    covariates: Mapping[str, Mapping[str, float]] | None = None,
) -> RatingDataset:
    """Read a long or wide rating CSV into a validated dataset.

    Row numbers in error messages count the header as row 1.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise ValidationError("rating file is empty: header row required")
    header = [h.strip() for h in reader.fieldnames]
    reader.fieldnames = header
    if layout == "long":
        records = _parse_long(reader, header, schema)
    elif layout == "wide":
        records = _parse_wide(reader, header, schema)
    else:
        raise ValueError(f"unknown layout {layout!r}; expected 'long' or 'wide'")

    seen: dict[tuple, int] = {}
    for row, rec in records:
        key = (rec.subject_id, rec.rater_id, rec.attribute)
        if key in seen:
            raise ValidationError(
                f"row {row}: duplicate record for subject {rec.subject_id!r}, rater "
                f"{rec.rater_id!r}, attribute {rec.attribute!r} (first seen on row {seen[key]})"
            )
        seen[key] = row
    return RatingDataset(schema, tuple(r for _, r in records), covariates or {})


def _parse_long(reader, header, schema) -> list[tuple[int, RatingRecord]]:
    missing = [c for c in LONG_COLUMNS if c not in header]
    if missing:
        raise ValidationError(f"long layout header lacks columns {missing}")
    out = []
    for row, line in enumerate(reader, start=2):
        attribute = (line["attribute"] or "").strip()
        if attribute not in schema:
            raise ValidationError(f"row {row}: unknown attribute {attribute!r}")
        gate = _parse_bool(line.get("gate_answer") or "", row)
        raw = (line["value"] or "").strip()
        if raw:
            value = _score(schema, attribute, raw, row)
        elif gate is False:
            value = None
        else:
            raise ValidationError(f"row {row}: missing value for {attribute!r}")
        dur = (line.get("duration_min") or "").strip()
        rec = RatingRecord(
            subject_id=(line["subject_id"] or "").strip(),
            rater_id=(line["rater_id"] or "").strip(),
            attribute=attribute,
            value=value,
            gate_answer=gate,
            duration=_parse_number(dur, "duration", row) if dur else None,
        )
        try:
            _validate_record(schema, rec)
        except ValidationError as exc:
            raise ValidationError(f"row {row}: {exc}") from None
        out.append((row, rec))
    return out


def _parse_wide(reader, header, schema) -> list[tuple[int, RatingRecord]]:
    for col in ("subject_id", "rater_id"):
        if col not in header:
            raise ValidationError(f"wide layout header lacks column {col!r}")
    attr_cols = []
    for col in header:
        if col in ("subject_id", "rater_id", "duration_min"):
            continue
        base = col[: -len(GATE_SUFFIX)] if col.endswith(GATE_SUFFIX) else col
        if base not in schema:
            raise ValidationError(f"header: unknown attribute {col!r}")
        if col == base:
            attr_cols.append(col)
    out = []
    for row, line in enumerate(reader, start=2):
        subject = (line["subject_id"] or "").strip()
        rater = (line["rater_id"] or "").strip()
        dur = (line.get("duration_min") or "").strip()
        duration = _parse_number(dur, "duration", row) if dur else None
        for attribute in attr_cols:
            raw = (line[attribute] or "").strip()
            gate = _parse_bool(line.get(attribute + GATE_SUFFIX) or "", row)
            if raw:
                value = _score(schema, attribute, raw, row)
            elif gate is False:
                value = None
            else:
                continue
            rec = RatingRecord(subject, rater, attribute, value, gate, duration)
            try:
                _validate_record(schema, rec)
            except ValidationError as exc:
                raise ValidationError(f"row {row}: {exc}") from None
            out.append((row, rec))
    return out


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_ratings(dataset: RatingDataset, stream: TextIO, layout: str = "long") -> None:
    """Serialize ``dataset`` in the given layout; :func:`parse_ratings` reads it back."""
    writer = csv.writer(stream, lineterminator="\n")
    records = sorted(dataset.records, key=lambda r: (r.subject_id, r.rater_id, dataset.schema.rating_keys.index(r.attribute)))
    has_gate = any(r.gate_answer is not None for r in records)
    has_dur = any(r.duration is not None for r in records)
    if layout == "long":
        header = list(LONG_COLUMNS)
        if has_gate:
            header.append("gate_answer")
        if has_dur:
            header.append("duration_min")
        writer.writerow(header)
        for r in records:
            row = [r.subject_id, r.rater_id, r.attribute, _fmt(r.value)]
            if has_gate:
                row.append(_fmt(r.gate_answer))
            if has_dur:
                row.append(_fmt(r.duration))
            writer.writerow(row)
    elif layout == "wide":
        keys = dataset.attributes
        gated = [k for k in keys if any(r.attribute == k and r.gate_answer is not None for r in records)]
        header = ["subject_id", "rater_id", *keys, *(k + GATE_SUFFIX for k in gated)]
        if has_dur:
            header.append("duration_min")
        writer.writerow(header)
        grouped: dict[tuple[str, str], dict[str, RatingRecord]] = defaultdict(dict)
        for r in records:
            grouped[(r.subject_id, r.rater_id)][r.attribute] = r
        for (subject, rater), by_attr in grouped.items():
            row = [subject, rater]
            row += [_fmt(by_attr[k].value) if k in by_attr else "" for k in keys]
            row += [_fmt(by_attr[k].gate_answer) if k in by_attr else "" for k in gated]
            if has_dur:
                durations = [r.duration for r in by_attr.values() if r.duration is not None]
                if len(set(durations)) > 1:
                    raise ValidationError(
                        f"wide layout needs one duration per (subject, rater); "
                        f"{subject!r}/{rater!r} has {sorted(set(durations))}"
                    )
                row.append(_fmt(durations[0]) if durations else "")
            writer.writerow(row)
    else:
        raise ValueError(f"unknown layout {layout!r}; expected 'long' or 'wide'")


def parse_covariates(stream: TextIO | str) -> dict[str, dict[str, float]]:
    """Read ``subject_id,<name>...``; blank cells are omitted for that subject."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("covariate file is empty: header row required") from None
    if not header or header[0] != "subject_id":
        raise ValidationError("covariate header must start with 'subject_id'")
    names = header[1:]
    if len(set(names)) != len(names):
        raise ValidationError(f"covariate names must be unique, got {names}")
    out: dict[str, dict[str, float]] = {}
    for row, line in enumerate(reader, start=2):
        if not line:
            continue
        subject = line[0].strip()
        if subject in out:
            raise ValidationError(f"row {row}: duplicate covariate row for subject {subject!r}")
        values = {}
        for name, cell in zip(names, line[1:]):
            if cell.strip():
                values[name] = _parse_number(cell.strip(), f"covariate {name!r}", row)
        out[subject] = values
    return out


def write_covariates(covariates: Mapping[str, Mapping[str, float]], stream: TextIO) -> None:
    names: list[str] = []
    for v in covariates.values():
        names += [n for n in v if n not in names]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["subject_id", *names])
    for subject in sorted(covariates):
        writer.writerow([subject, *(_fmt(covariates[subject].get(n)) for n in names)])


# --------------------------------------------------------------------------
# rating matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RatingMatrix:
    """Subjects x raters grid of scores for one attribute; NaN marks a missing cell."""

    attribute: str
    subject_ids: tuple[str, ...]
    rater_ids: tuple[str, ...]
    cells: np.ndarray
    scale: Scale = Scale("continuous")

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != 2 or cells.shape != (len(self.subject_ids), len(self.rater_ids)):
            raise ValueError(
                f"cells shape {cells.shape} does not match "
                f"{len(self.subject_ids)} subjects x {len(self.rater_ids)} raters"
            )
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        object.__setattr__(self, "rater_ids", tuple(self.rater_ids))

    @classmethod
    def from_array(cls, cells, attribute: str = "score", scale: Scale | None = None) -> "RatingMatrix":
        """Wrap a bare array; subjects/raters get zero-padded ids so sort order is positional."""
        cells = np.asarray(cells, dtype=float)
        if cells.ndim != 2:
            raise ValueError("rating matrix must be two-dimensional")
        n, k = cells.shape
        wn, wk = len(str(max(n - 1, 0))), len(str(max(k - 1, 0)))
        return cls(
            attribute,
            tuple(f"s{i:0{wn}d}" for i in range(n)),
            tuple(f"r{j:0{wk}d}" for j in range(k)),
            cells,
            scale or Scale("continuous"),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    @property
    def n_subjects(self) -> int:
        return self.cells.shape[0]

    @property
    def n_raters(self) -> int:
        return self.cells.shape[1]

    @property
    def is_complete(self) -> bool:
        return not np.isnan(self.cells).any()

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.cells).sum())


def build_matrix(
    dataset: RatingDataset,
    attribute: str,
    panel: Sequence[str] | None = None,
    policy: str = "keep-incomplete",
) -> RatingMatrix:
    """Assemble the subjects x raters grid for ``attribute``.

    Subjects and raters are sorted lexicographically. Subjects without any
    score from the panel are left out. ``listwise-complete`` additionally
    drops every subject missing a score from any panel rater.
    """
    if policy not in ("keep-incomplete", "listwise-complete"):
        raise ValueError(f"unknown policy {policy!r}")
    scale = dataset.schema.scale_for(attribute)
    if panel is None:
        raters = sorted({r.rater_id for r in dataset.records if r.attribute == attribute})
    else:
        known = set(dataset.rater_ids)
        unknown = [r for r in panel if r not in known]
        if unknown:
            raise ValidationError(f"panel raters not in dataset: {unknown}")
        raters = sorted(set(panel))
    if len(raters) < 2:
        raise ValidationError(f"at least 2 raters required for {attribute!r}, got {len(raters)}")
    col = {r: j for j, r in enumerate(raters)}
    scores: dict[str, dict[str, float]] = defaultdict(dict)
    for rec in dataset.records:
        if rec.attribute == attribute and rec.value is not None and rec.rater_id in col:
            scores[rec.subject_id][rec.rater_id] = rec.value
    subjects = sorted(scores)
    if policy == "listwise-complete":
        subjects = [s for s in subjects if len(scores[s]) == len(raters)]
    if len(subjects) < 2:
        raise ValidationError(f"at least 2 subjects required for {attribute!r}, got {len(subjects)}")
    cells = np.full((len(subjects), len(raters)), np.nan)
    for i, s in enumerate(subjects):
        for r, v in scores[s].items():
            cells[i, col[r]] = v
    return RatingMatrix(attribute, tuple(subjects), tuple(raters), cells, scale)


def subject_scores(dataset: RatingDataset, attributes: Sequence[str] | None = None) -> tuple[tuple[str, ...], np.ndarray]:
    """Per-subject mean score for each attribute (subjects x attributes, NaN if unrated)."""
    attributes = list(attributes or dataset.attributes)
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, np.ndarray] = {}
    idx = {a: j for j, a in enumerate(attributes)}
    for rec in dataset.records:
        if rec.value is None or rec.attribute not in idx:
            continue
        if rec.subject_id not in sums:
            sums[rec.subject_id] = np.zeros(len(attributes))
            counts[rec.subject_id] = np.zeros(len(attributes))
        sums[rec.subject_id][idx[rec.attribute]] += rec.value
        counts[rec.subject_id][idx[rec.attribute]] += 1
    subjects = tuple(sorted(sums))
    with np.errstate(invalid="ignore", divide="ignore"):
        table = np.array([sums[s] / counts[s] for s in subjects]).reshape(len(subjects), len(attributes))
    return subjects, table


# --------------------------------------------------------------------------
# descriptives
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Quartiles:
    median: float
    q1: float
    q3: float
    count: int

    @classmethod
    def of(cls, values) -> "Quartiles":
        # numpy's default "linear" method is the type-7 rule
        values = np.asarray(values, dtype=float)
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        return cls(float(med), float(q1), float(q3), int(values.size))

    def to_dict(self) -> dict:
        return {"median": self.median, "q1": self.q1, "q3": self.q3, "count": self.count}


@dataclass(frozen=True)
class DescriptiveSummary:
    attributes: Mapping[str, Quartiles]
    durations: Mapping[str, Quartiles]

    def to_dict(self) -> dict:
        return {
            "attributes": {k: v.to_dict() for k, v in self.attributes.items()},
            "durations": {k: v.to_dict() for k, v in self.durations.items()},
        }


def describe(dataset: RatingDataset, rater_groups: Mapping[str, str] | None = None) -> DescriptiveSummary:
    """Median and quartiles of every attribute, plus evaluation durations per rater group.

    A duration belongs to a (subject, rater) evaluation; when several records
    of one evaluation carry it, it is counted once. ``rater_groups`` maps
    rater id to a group label; unmapped raters fall into ``"all"``.
    """
    attrs = {}
    for key in dataset.schema.rating_keys:
        values = dataset.values(key)
        if values.size:
            attrs[key] = Quartiles.of(values)
    evaluations: dict[tuple[str, str], float] = {}
    for rec in dataset.records:
        if rec.duration is not None:
            evaluations.setdefault((rec.subject_id, rec.rater_id), rec.duration)
    groups: dict[str, list[float]] = defaultdict(list)
    for (_, rater), minutes in sorted(evaluations.items()):
        groups[(rater_groups or {}).get(rater, "all")].append(minutes)
    durations = {g: Quartiles.of(v) for g, v in sorted(groups.items())}
    return DescriptiveSummary(MappingProxyType(attrs), MappingProxyType(durations))
