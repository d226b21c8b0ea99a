"""Skeleton sequence files, dataset manifests, evaluation splits and synthetic data."""
from __future__ import annotations

import enum
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geometry import ConfigError, InputError, PostureSequence


class SequenceFileError(InputError):
    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}" if line else f"{path}: {msg}")
        self.path = str(path)
        self.line = line


@dataclass(frozen=True)
class SequenceFormat:
    """How to read one frame per line.

    ``columns`` selects (and orders) the 3*J coordinate tokens out of each
    line for dataset-native layouts; None means the line holds exactly the
    3*J coordinates. ``delimiter`` None auto-detects comma vs whitespace.
    Lines equal to one of ``skip_lines`` are ignored, as are '#' comments.
    """

    joints: int = 15
    columns: Optional[tuple[int, ...]] = None
    delimiter: Optional[str] = None
    skip_lines: tuple[str, ...] = ("END",)

    def __post_init__(self):
        if self.joints < 1:
            raise ConfigError("joints must be >= 1")
        if self.columns is not None and len(self.columns) != 3 * self.joints:
            raise ConfigError(f"columns must list {3 * self.joints} indices, got {len(self.columns)}")

    @property
    def dims(self) -> int:
        return 3 * self.joints

    def to_dict(self) -> dict:
        return {"joints": self.joints, "columns": list(self.columns) if self.columns else None,
                "delimiter": self.delimiter, "skip_lines": list(self.skip_lines)}

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceFormat":
        if d.get("preset"):
            if d["preset"] not in PRESETS:
                raise ConfigError(f"unknown format preset {d['preset']!r}; known: {sorted(PRESETS)}")
            return PRESETS[d["preset"]]
        cols = d.get("columns")
        return cls(int(d.get("joints", 15)), tuple(cols) if cols else None,
                   d.get("delimiter"), tuple(d.get("skip_lines", ("END",))))


def _cad60_columns() -> tuple[int, ...]:
    # frame id, then 11 joints x (9 orientation + conf + 3 position + conf),
    # then 4 joints x (3 position + conf)
    cols = []
    for j in range(11):
        base = 1 + 14 * j + 10
        cols += [base, base + 1, base + 2]
    for j in range(4):
        base = 1 + 14 * 11 + 4 * j
        cols += [base, base + 1, base + 2]
    return tuple(cols)


CANONICAL = SequenceFormat()
CAD60 = SequenceFormat(joints=15, columns=_cad60_columns(), delimiter=",")
PRESETS = {"canonical": CANONICAL, "cad60": CAD60}

# Joint indices (0-based) of the 15-joint Kinect/OpenNI layout used by CAD-60:
# head, neck, torso, l-shoulder, l-elbow, r-shoulder, r-elbow, l-hip, l-knee,
# r-hip, r-knee, l-hand, r-hand, l-foot, r-foot. The layout has no ankle
# joints, so the feet stand in for them.
DEFAULT_LR_PAIRS = {"hand": (11, 12), "ankle": (13, 14), "shoulder": (3, 5)}


def _split(line: str, delimiter: Optional[str]) -> list[str]:
    if delimiter is None:
        delimiter = "," if "," in line else None
    if delimiter is None:
        return line.split()
    toks = [t.strip() for t in line.split(delimiter)]
    while toks and toks[-1] == "":
        toks.pop()
    return toks


def load_sequence_file(path, fmt: SequenceFormat = CANONICAL, **meta) -> PostureSequence:
    """Read a skeleton sequence file; one frame per line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SequenceFileError(path, 0, f"cannot read file ({exc.strerror})") from exc
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line in fmt.skip_lines:
            continue
        toks = _split(line, fmt.delimiter)
        if fmt.columns is None:
            if len(toks) != fmt.dims:
                raise SequenceFileError(path, lineno, f"expected {fmt.dims} values, found {len(toks)}")
        else:
            need = max(fmt.columns) + 1
            if len(toks) < need:
                raise SequenceFileError(path, lineno, f"expected at least {need} columns, found {len(toks)}")
            toks = [toks[c] for c in fmt.columns]
        try:
            vals = [float(t) for t in toks]
        except ValueError:
            bad = next(t for t in toks if not _is_float(t))
            raise SequenceFileError(path, lineno, f"non-numeric value {bad!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise SequenceFileError(path, lineno, "non-finite value")
        rows.append(vals)
    if not rows:
        raise SequenceFileError(path, 0, "no frames in file")
    meta.setdefault("name", str(path))
    return PostureSequence(np.array(rows), **meta)


def _is_float(t: str) -> bool:
    try:
        float(t)
    except ValueError:
        return False
    return True


def format_sequence(postures) -> str:
    """Canonical text form: space separated shortest round-trip floats."""
    X = np.asarray(postures, dtype=np.float64)
    return "".join(" ".join(repr(float(v)) for v in row) + "\n" for row in X)


def write_sequence_file(path, seq) -> None:
    X = seq.postures if isinstance(seq, PostureSequence) else seq
    Path(path).write_text(format_sequence(X))


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    subject: str
    environment: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"path": self.path, "label": self.label, "subject": self.subject}
        if self.environment is not None:
            d["environment"] = self.environment
        return d


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    joints: int = 15
    format: SequenceFormat = CANONICAL
    root: Path = field(default_factory=Path)
    note: str = ""

    def __len__(self):
        return len(self.entries)

    def resolve(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        return p if p.is_absolute() else self.root / p

    def load(self, i: int) -> PostureSequence:
        e = self.entries[i]
        return load_sequence_file(self.resolve(e), self.format, label=e.label, subject=e.subject,
                                  environment=e.environment, name=e.path)

    def load_all(self) -> list[PostureSequence]:
        return [self.load(i) for i in range(len(self.entries))]

    def to_json(self) -> str:
        entries = [e.to_dict() for e in self.entries]
        if self.format == CANONICAL and self.joints == 15 and not self.note:
            return json.dumps(entries, indent=1)
        return json.dumps({"joints": self.joints, "format": self.format.to_dict(),
                           "note": self.note, "entries": entries}, indent=1)


def _entry(d: dict, i: int) -> ManifestEntry:
    try:
        path, label, subject = d["path"], d["label"], d["subject"]
    except (KeyError, TypeError):
        raise InputError(f"manifest entry {i} needs path, label and subject") from None
    label, subject = str(label), str(subject)
    if not label or not subject:
        raise InputError(f"manifest entry {i} has an empty label or subject")
    env = d.get("environment")
    return ManifestEntry(str(path), label, subject, None if env is None else str(env))


def load_manifest(path) -> DatasetManifest:
    """Read a JSON manifest.

    Either a bare array of ``{path, label, subject, environment?}`` objects
    (canonical 15-joint files) or an object with ``entries`` plus optional
    ``joints``, ``format`` and ``note``. Relative paths resolve against the
    manifest's directory.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from exc
    if isinstance(data, list):
        raw, joints, fmt, note = data, 15, CANONICAL, ""
    elif isinstance(data, dict) and "entries" in data:
        raw = data["entries"]
        fmt = SequenceFormat.from_dict(data["format"]) if data.get("format") else CANONICAL
        joints = int(data.get("joints", fmt.joints))
        if joints != fmt.joints:
            fmt = replace(fmt, joints=joints)
        note = data.get("note", "")
    else:
        raise InputError(f"manifest {path} must be a JSON array or an object with 'entries'")
    entries = [_entry(d, i) for i, d in enumerate(raw)]
    if not entries:
        raise InputError(f"manifest {path} has no entries")
    return DatasetManifest(entries, joints, fmt, path.parent, note)


def normalize_handedness(seq: PostureSequence, pairs: dict = DEFAULT_LR_PAIRS, axis: int = 1) -> PostureSequence:
    """Map a left-handed performer onto a right-handed one.

    If, in the first frame, the right hand's coordinate along ``axis`` is
    smaller than the left hand's, that coordinate is exchanged between each
    left/right joint pair in every frame. ``pairs`` maps a body part to
    (left joint, right joint) and must contain ``"hand"``.
    """
    J = seq.dims // 3
    if "hand" not in pairs:
        raise ConfigError("pair map must include 'hand'")
    if not 0 <= axis < 3:
        raise ConfigError(f"axis must be 0, 1 or 2, got {axis}")
    for part, (l, r) in pairs.items():
        if not (0 <= l < J and 0 <= r < J):
            raise ConfigError(f"joint index for {part!r} out of range for {J} joints")
    X = seq.postures
    lh, rh = pairs["hand"]
    if not X[0, 3 * rh + axis] < X[0, 3 * lh + axis]:
        return seq
    Y = X.copy()
    for l, r in pairs.values():
        Y[:, 3 * l + axis] = X[:, 3 * r + axis]
        Y[:, 3 * r + axis] = X[:, 3 * l + axis]
    return seq.with_postures(Y)


class ProtocolKind(enum.Enum):
    SETUP_A = "setupA"
    SETUP_B = "setupB"
    SETUP_C = "setupC"
    NEW_PERSON = "new-person"
    CROSS_PERSON_ENV = "cross-person-env"
    LEAVE_ONE_OUT = "loo"


class Grouping(enum.Enum):
    GESTURES = "gestures"
    ACTIONS = "actions"
    SUBSET1 = "subset1"
    SUBSET2 = "subset2"
    SUBSET3 = "subset3"
    ALL = "all"


SETUP_FRACTIONS = {ProtocolKind.SETUP_A: 1 / 3, ProtocolKind.SETUP_B: 2 / 3, ProtocolKind.SETUP_C: 1 / 2}

KARD_GROUPS = {
    Grouping.SUBSET1: ["Horizontal arm wave", "Two-hand wave", "Bend", "Phone call",
                       "Stand up", "Forward kick", "Draw X", "Walk"],
    Grouping.SUBSET2: ["High arm wave", "Side kick", "Catch cap", "Draw tick",
                       "Hand clap", "Forward kick", "Bend", "Sit down"],
    Grouping.SUBSET3: ["Draw tick", "Drink", "Sit down", "Phone call",
                       "Take umbrella", "Toss paper", "High throw", "Horizontal arm wave"],
    Grouping.GESTURES: ["Horizontal arm wave", "High arm wave", "Two-hand wave", "Catch cap",
                        "High throw", "Draw X", "Draw tick", "Forward kick", "Side kick", "Hand clap"],
    Grouping.ACTIONS: ["Bend", "Drink", "Phone call", "Sit down", "Stand up",
                       "Take umbrella", "Toss paper", "Walk"],
}


def label_key(label: str) -> str:
    """Comparison key for class names: lowercase alphanumerics only."""
    return re.sub(r"[^a-z0-9]", "", label.lower())


@dataclass(frozen=True)
class SplitProtocol:
    kind: ProtocolKind
    grouping: Grouping = Grouping.ALL
    seed: int = 0

    @classmethod
    def parse(cls, kind: str, grouping: str = "all", seed: int = 0) -> "SplitProtocol":
        try:
            return cls(ProtocolKind(kind), Grouping(grouping), int(seed))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class Split:
    train: tuple[int, ...]
    test: tuple[int, ...]
    tag: str = ""


def filter_entries(entries: Sequence[ManifestEntry], grouping: Grouping) -> list[int]:
    if grouping is Grouping.ALL:
        return list(range(len(entries)))
    wanted = {label_key(c) for c in KARD_GROUPS[grouping]}
    keep = [i for i, e in enumerate(entries) if label_key(e.label) in wanted]
    if not keep:
        raise ConfigError(f"grouping {grouping.value!r} matches no labels in the manifest")
    return keep


def make_splits(manifest, protocol: SplitProtocol, repetitions: int = 1) -> list[Split]:
    """Train/test index splits into ``manifest.entries``.

    Setups A/B/C draw 1/3, 2/3, 1/2 of every class for training, one split
    per repetition seeded with ``seed + repetition``. New-person holds out
    one subject per split; cross-person-env holds out one subject within one
    environment, training on the other subjects of that environment.
    """
    entries = manifest.entries if isinstance(manifest, DatasetManifest) else list(manifest)
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    pool = filter_entries(entries, protocol.grouping)
    kind = protocol.kind

    if kind in SETUP_FRACTIONS:
        frac = SETUP_FRACTIONS[kind]
        by_class = defaultdict(list)
        for i in pool:
            by_class[entries[i].label].append(i)
        splits = []
        for rep in range(repetitions):
            rng = np.random.default_rng(protocol.seed + rep)
            train, test = [], []
            for label in sorted(by_class):
                idx = by_class[label]
                n = len(idx)
                n_train = int(math.floor(n * frac + 0.5))
                n_train = min(max(n_train, 1), n - 1) if n > 1 else n
                perm = rng.permutation(n)
                train += [idx[p] for p in perm[:n_train]]
                test += [idx[p] for p in perm[n_train:]]
            splits.append(Split(tuple(sorted(train)), tuple(sorted(test)),
                                f"{kind.value}/seed={protocol.seed + rep}"))
        return splits

    if kind is ProtocolKind.NEW_PERSON:
        subjects = sorted({entries[i].subject for i in pool})
        if len(subjects) < 2:
            raise ConfigError("new-person protocol needs at least two subjects")
        return [Split(tuple(i for i in pool if entries[i].subject != s),
                      tuple(i for i in pool if entries[i].subject == s), f"subject={s}")
                for s in subjects]

    if kind is ProtocolKind.CROSS_PERSON_ENV:
        if any(entries[i].environment is None for i in pool):
            raise ConfigError("cross-person-env protocol needs an environment tag on every entry")
        splits = []
        for env in sorted({entries[i].environment for i in pool}):
            in_env = [i for i in pool if entries[i].environment == env]
            for s in sorted({entries[i].subject for i in in_env}):
                train = tuple(i for i in in_env if entries[i].subject != s)
                test = tuple(i for i in in_env if entries[i].subject == s)
                if train:
                    splits.append(Split(train, test, f"environment={env}/subject={s}"))
        if not splits:
            raise ConfigError("cross-person-env protocol produced no splits")
        return splits

    if kind is ProtocolKind.LEAVE_ONE_OUT:
        if len(pool) < 2:
            raise ConfigError("leave-one-out needs at least two sequences")
        return [Split(tuple(j for j in pool if j != i), (i,), f"holdout={i}") for i in pool]

    raise ConfigError(f"unsupported protocol {kind}")


def synthesize_dataset(classes: int = 5, per_class: int = 10, frames: int = 60, joints: int = 15,
                       noise: float = 1.0, seed: int = 0, spread: float = 5.0,
                       waypoints: int = 4) -> tuple[DatasetManifest, list[PostureSequence]]:
    """Noisy copies of random piecewise-linear class prototypes.

    Each class gets ``waypoints`` random points (normal, std ``spread``) in
    3*joints dimensions joined by straight segments and sampled at
    ``frames`` evenly spaced times; each sequence adds i.i.d. normal noise
    of std ``noise``. Sequence i of every class is tagged subject i.
    """
    if classes < 1 or per_class < 1 or frames < 1 or joints < 1 or waypoints < 1:
        raise ConfigError("classes, per_class, frames, joints and waypoints must be >= 1")
    if noise < 0 or spread <= 0:
        raise ConfigError("noise must be >= 0 and spread > 0")
    rng = np.random.default_rng(seed)
    D = 3 * joints
    t = np.linspace(0.0, waypoints - 1, frames)
    entries, seqs = [], []
    for c in range(classes):
        W = rng.normal(0.0, spread, size=(waypoints, D))
        if waypoints == 1:
            proto = np.repeat(W, frames, axis=0)
        else:
            seg = np.minimum(t.astype(int), waypoints - 2)
            frac = (t - seg)[:, None]
            proto = W[seg] * (1.0 - frac) + W[seg + 1] * frac
        for s in range(per_class):
            X = proto + rng.normal(0.0, noise, size=proto.shape) if noise > 0 else proto.copy()
            label, subject = f"class{c:02d}", f"subject{s:02d}"
            name = f"{label}_{subject}.txt"
            entries.append(ManifestEntry(name, label, subject))
            seqs.append(PostureSequence(X, label, subject, name))
    return DatasetManifest(entries, joints, note="synthetic"), seqs


def write_dataset(out_dir, manifest: DatasetManifest, sequences: Sequence[PostureSequence]) -> Path:
    """Write every sequence in canonical form plus ``manifest.json``; return the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for e, s in zip(manifest.entries, sequences):
        write_sequence_file(out / e.path, s)
    mpath = out / "manifest.json"
    mpath.write_text(DatasetManifest(manifest.entries, manifest.joints, manifest.format).to_json() + "\n")
    return mpath
