"""Preprocess tidy transcripts into day-level documents and a sparse
document-term matrix, plus the sitting-period structure used downstream.

A document is everything said in one chamber on one sitting day. The token
pipeline follows the conventions of the transcript dataset this package was
built around: lowercase, optional OCR substitutions, multiword expressions
joined by underscores, digits and punctuation removed, stopwords dropped.
Words are deliberately not stemmed.
"""
from __future__ import annotations

import csv
import datetime as dt
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .record_parser import CHAMBERS, SpeakerTurn

log = logging.getLogger(__name__)

DEFAULT_PROBE_WORDS = ("and", "be", "of", "the", "to")

_DIGITS_RE = re.compile(r"[0-9]")
_NON_WORD_RE = re.compile(r"[^\w\s]")
_HAS_LETTER_RE = re.compile(r"[^\W\d_]")


def _asset(name: str) -> Path:
    return Path(resources.files("agenda").joinpath(f"assets/{name}"))


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: frozenset[str] = frozenset()
    mwes: tuple[str, ...] = ()
    substitutions: tuple[tuple[str, str], ...] = ()
    min_term_count: int = 5

    @classmethod
    def default(cls, min_term_count: int = 5) -> "PreprocessConfig":
        return cls.from_files(
            stopwords_path=_asset("stopwords.txt"),
            mwe_path=_asset("mwe.txt"),
            substitutions_path=_asset("substitutions.csv"),
            min_term_count=min_term_count,
        )

    @classmethod
    def from_files(cls, stopwords_path=None, mwe_path=None,
                   substitutions_path=None, min_term_count: int = 5,
                   ) -> "PreprocessConfig":
        stopwords: frozenset[str] = frozenset()
        if stopwords_path is not None:
            stopwords = frozenset(_read_word_list(stopwords_path))
        mwes: tuple[str, ...] = ()
        if mwe_path is not None:
            mwes = tuple(_read_word_list(mwe_path))
        subs: tuple[tuple[str, str], ...] = ()
        if substitutions_path is not None:
            subs = tuple(_read_substitutions(substitutions_path))
        return cls(stopwords=stopwords, mwes=mwes, substitutions=subs,
                   min_term_count=min_term_count)

    @classmethod
    def from_config_file(cls, path: str | Path) -> "PreprocessConfig":
        """Key-value config: stopwords_path, mwe_path, substitutions_path,
        min_term_count. Paths are resolved relative to the config file."""
        kv = read_key_value_config(path)
        base = Path(path).parent

        def resolve(key):
            if key not in kv:
                return None
            return (base / kv[key]).resolve()

        return cls.from_files(
            stopwords_path=resolve("stopwords_path"),
            mwe_path=resolve("mwe_path"),
            substitutions_path=resolve("substitutions_path"),
            min_term_count=int(kv.get("min_term_count", 5)),
        )


def read_key_value_config(path: str | Path) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and '#' comments ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _read_word_list(path: str | Path) -> list[str]:
    items = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip().lower()
        if line and not line.startswith("#"):
            items.append(line)
    return items


def _read_substitutions(path: str | Path) -> list[tuple[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["from", "to"]:
            raise ValueError(f"{path}: expected header from,to")
        return [(row[0].strip().lower(), row[1].strip().lower())
                for row in reader if row]


def preprocess(text: str, config: PreprocessConfig) -> list[str]:
    """Tokenize one blob of text.

    Steps: lowercase; apply OCR substitutions on word boundaries; join each
    configured multiword expression with underscores; delete digits and
    punctuation; split on whitespace; drop stopwords and tokens without any
    letter. No stemming.
    """
    s = text.lower()
    for src, dst in config.substitutions:
        s = re.sub(rf"\b{re.escape(src)}\b", dst, s)
    # Longest expression first so "new south wales" wins over "south wales".
    for mwe in sorted(config.mwes, key=len, reverse=True):
        words = [re.escape(w) for w in mwe.split()]
        if not words:
            continue
        s = re.sub(r"\b" + r"\s+".join(words) + r"\b", "_".join(mwe.split()), s)
    s = _DIGITS_RE.sub("", s)
    s = _NON_WORD_RE.sub("", s)
    return [tok for tok in s.split()
            if tok not in config.stopwords and _HAS_LETTER_RE.search(tok)]


# -- vocabulary and matrix ----------------------------------------------------

@dataclass
class Vocabulary:
    terms: list[str]
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")

    def __len__(self):
        return len(self.terms)


@dataclass
class DocTermMatrix:
    docs: list[tuple[str, dt.date]]  # (chamber, date) per row
    counts: sp.csr_matrix            # D x V, non-negative ints

    @property
    def n_docs(self) -> int:
        return self.counts.shape[0]

    @property
    def n_terms(self) -> int:
        return self.counts.shape[1]

    @property
    def doc_lengths(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel()


def group_days(corpus: list[SpeakerTurn]) -> dict[tuple[str, dt.date], list[str]]:
    """Collect turn texts per (chamber, date), in turn order."""
    days: dict[tuple[str, dt.date], list[str]] = {}
    for turn in sorted(corpus, key=lambda t: (t.date, t.chamber, t.turn_index)):
        days.setdefault((turn.chamber, turn.date), []).append(turn.text)
    return days


def build_matrix(corpus: list[SpeakerTurn], config: PreprocessConfig,
                 ) -> tuple[Vocabulary, DocTermMatrix]:
    """Count tokens per (chamber, date) document.

    Terms occurring fewer than config.min_term_count times in the whole corpus
    are dropped; documents left without tokens are dropped and logged.
    """
    if not corpus:
        raise ValueError("empty corpus")
    days = group_days(corpus)
    tokenized = {key: preprocess(" ".join(texts), config)
                 for key, texts in days.items()}

    totals: dict[str, int] = {}
    for toks in tokenized.values():
        for tok in toks:
            totals[tok] = totals.get(tok, 0) + 1
    vocab_terms = sorted(t for t, c in totals.items() if c >= config.min_term_count)
    if not vocab_terms:
        raise ValueError("no terms survive preprocessing")
    vocab = Vocabulary(vocab_terms)

    docs: list[tuple[str, dt.date]] = []
    rows, cols, vals = [], [], []
    for key in sorted(tokenized, key=lambda k: (k[1], k[0])):
        counts: dict[int, int] = {}
        for tok in tokenized[key]:
            tid = vocab.index.get(tok)
            if tid is not None:
                counts[tid] = counts.get(tid, 0) + 1
        if not counts:
            log.info("dropping empty document %s %s", key[0], key[1])
            continue
        d = len(docs)
        docs.append(key)
        for tid, c in sorted(counts.items()):
            rows.append(d)
            cols.append(tid)
            vals.append(c)
    if not docs:
        raise ValueError("all documents empty after preprocessing")
    counts = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)),
        shape=(len(docs), len(vocab)))
    return vocab, DocTermMatrix(docs=docs, counts=counts)


# -- sitting periods -----------------------------------------------------------

@dataclass
class SittingCalendar:
    days: list[dt.date]              # union over chambers, sorted unique
    period_of_day: dict[dt.date, int]
    period_count: int
    days_by_chamber: dict[str, list[dt.date]] = field(default_factory=dict)

    def period_days(self, period: int) -> list[dt.date]:
        return [d for d in self.days if self.period_of_day[d] == period]


def derive_sitting_periods(days: list[dt.date]) -> SittingCalendar:
    """Partition sorted unique sitting days into sitting periods.

    A new period starts exactly when the gap to the previous sitting day is
    seven or more calendar days; consecutive days closer than a week share a
    period. Period ids are 0-based in chronological order.
    """
    if not days:
        raise ValueError("no sitting days")
    ordered = sorted(set(days))
    period_of_day: dict[dt.date, int] = {}
    period = 0
    for i, day in enumerate(ordered):
        if i > 0 and (day - ordered[i - 1]).days >= 7:
            period += 1
        period_of_day[day] = period
    return SittingCalendar(days=ordered, period_of_day=period_of_day,
                           period_count=period + 1)


def calendar_from_docs(docs: list[tuple[str, dt.date]]) -> SittingCalendar:
    """Sitting periods over the union of both chambers' days."""
    cal = derive_sitting_periods([d for _, d in docs])
    by_chamber: dict[str, list[dt.date]] = {}
    for chamber, day in sorted(set(docs), key=lambda x: (x[1], x[0])):
        by_chamber.setdefault(chamber, []).append(day)
    cal.days_by_chamber = by_chamber
    return cal


def stopword_share(corpus: list[SpeakerTurn],
                   probe_words: tuple[str, ...] = DEFAULT_PROBE_WORDS,
                   ) -> list[tuple[str, dt.date, float]]:
    """Per (chamber, day) share of probe words in the raw pre-stopword text.

    Tokenization here is only lowercase + digit/punctuation removal, so the
    probe words are still present; days with no tokens report 0.0.
    """
    bare = PreprocessConfig(stopwords=frozenset(), mwes=(), substitutions=())
    probe = {w.lower() for w in probe_words}
    out = []
    for (chamber, day), texts in sorted(group_days(corpus).items(),
                                        key=lambda kv: (kv[0][1], kv[0][0])):
        toks = preprocess(" ".join(texts), bare)
        share = sum(tok in probe for tok in toks) / len(toks) if toks else 0.0
        out.append((chamber, day, share))
    return out


# -- artifact IO ----------------------------------------------------------------

def write_dtm(vocab: Vocabulary, dtm: DocTermMatrix, out_dir: str | Path) -> None:
    """Write vocabulary.txt (one term per line), docs.csv and the sparse
    triplet matrix.csv with header doc_id,term_id,count."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "vocabulary.txt").write_text(
        "".join(t + "\n" for t in vocab.terms), encoding="utf-8")
    with open(out_dir / "docs.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "chamber", "date"])
        for i, (chamber, day) in enumerate(dtm.docs):
            writer.writerow([i, chamber, day.isoformat()])
    coo = dtm.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(out_dir / "matrix.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "term_id", "count"])
        for i in order:
            writer.writerow([int(coo.row[i]), int(coo.col[i]), int(coo.data[i])])


def read_dtm(in_dir: str | Path) -> tuple[Vocabulary, DocTermMatrix]:
    in_dir = Path(in_dir)
    terms = (in_dir / "vocabulary.txt").read_text(encoding="utf-8").splitlines()
    vocab = Vocabulary([t for t in terms if t])
    docs: list[tuple[str, dt.date]] = []
    with open(in_dir / "docs.csv", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            docs.append((row["chamber"], dt.date.fromisoformat(row["date"])))
    rows, cols, vals = [], [], []
    with open(in_dir / "matrix.csv", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append(int(row["doc_id"]))
            cols.append(int(row["term_id"]))
            vals.append(int(row["count"]))
    counts = sp.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)),
        shape=(len(docs), len(vocab)))
    return vocab, DocTermMatrix(docs=docs, counts=counts)


def write_calendar(calendar: SittingCalendar, docs: list[tuple[str, dt.date]],
                   path: str | Path) -> None:
    """Calendar CSV `date,chamber,period_id`, one row per (date, chamber)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "chamber", "period_id"])
        for chamber, day in sorted(set(docs), key=lambda x: (x[1], x[0])):
            writer.writerow([day.isoformat(), chamber, calendar.period_of_day[day]])


def read_calendar(path: str | Path) -> SittingCalendar:
    period_of_day: dict[dt.date, int] = {}
    by_chamber: dict[str, list[dt.date]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            day = dt.date.fromisoformat(row["date"])
            period_of_day[day] = int(row["period_id"])
            by_chamber.setdefault(row["chamber"], []).append(day)
    days = sorted(period_of_day)
    if not days:
        raise ValueError(f"{path}: empty calendar")
    return SittingCalendar(days=days, period_of_day=period_of_day,
                           period_count=max(period_of_day.values()) + 1,
                           days_by_chamber=by_chamber)
