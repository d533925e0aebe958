"""Turn raw extracted transcript text into ordered speaker turns per sitting day.

Input pages are plain-text files, one per (chamber, date), whose lines carry a
column tag produced by the upstream OCR/extraction step:

    L|text   left column
    R|text   right column
    F|text   full-width line (header, banner); acts as a region separator

The filename encodes the chamber and the ISO date, e.g. ``house_1901-05-09.txt``
or ``senate_1927-10-19.txt``. This module reflows two-column regions into
reading order, segments the stream into speaker turns using configurable
speaker-introduction patterns, and round-trips the result through a tidy CSV
(``date,chamber,speaker,text``).

No geometric layout analysis happens here: the column tags are trusted
metadata, and anything the speaker patterns do not match degrades to the
sentinel speaker ``UNATTRIBUTED`` rather than being dropped.
"""
from __future__ import annotations

import csv
import datetime as dt
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

HOUSE = "house"
SENATE = "senate"
CHAMBERS = (HOUSE, SENATE)

UNATTRIBUTED = "UNATTRIBUTED"

TIDY_HEADER = ["date", "chamber", "speaker", "text"]

_PAGE_NAME_RE = re.compile(r"^(house|senate)_(\d{4}-\d{2}-\d{2})\.txt$")


class ParseError(ValueError):
    """Raised for malformed page files or untagged lines in column regions."""


@dataclass(frozen=True)
class PageLine:
    text: str
    tag: str | None  # "L", "R", "F" or None for untagged


@dataclass
class RawPage:
    chamber: str
    date: dt.date
    lines: list[PageLine]

    def __post_init__(self):
        if self.chamber not in CHAMBERS:
            raise ParseError(f"unknown chamber {self.chamber!r}")


@dataclass(frozen=True)
class SpeakerTurn:
    speaker: str
    date: dt.date
    chamber: str
    text: str
    turn_index: int


def load_page(path: str | Path) -> RawPage:
    """Read a tagged page file; the filename supplies chamber and date."""
    path = Path(path)
    m = _PAGE_NAME_RE.match(path.name)
    if not m:
        raise ParseError(
            f"{path.name}: filename must be <chamber>_<YYYY-MM-DD>.txt "
            f"with chamber in {CHAMBERS}")
    chamber = m.group(1)
    try:
        date = dt.date.fromisoformat(m.group(2))
    except ValueError as exc:
        raise ParseError(f"{path.name}: bad date: {exc}") from exc
    lines: list[PageLine] = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        if len(raw) >= 2 and raw[0] in "LRF" and raw[1] == "|":
            lines.append(PageLine(text=raw[2:], tag=raw[0]))
        else:
            raise ParseError(f"{path.name}:{lineno}: line is not tagged L|/R|/F|")
    return RawPage(chamber=chamber, date=date, lines=lines)


def reflow_columns(page: RawPage) -> list[str]:
    """Reorder a page's lines into reading order.

    Within each region (a maximal run of lines between full-width lines) all
    left-column lines are emitted before all right-column lines, preserving
    the within-column order. Full-width lines stay where they are. The output
    is a permutation of the input lines.
    """
    out: list[str] = []
    region: list[tuple[int, PageLine]] = []

    def flush():
        if not region:
            return
        tagged = [ln for _, ln in region if ln.tag in ("L", "R")]
        untagged = [(i, ln) for i, ln in region if ln.tag is None]
        if tagged and untagged:
            lineno = untagged[0][0]
            raise ParseError(
                f"{page.chamber} {page.date}: line {lineno}: "
                f"untagged line in a two-column region")
        if tagged:
            out.extend(ln.text for _, ln in region if ln.tag == "L")
            out.extend(ln.text for _, ln in region if ln.tag == "R")
        else:
            out.extend(ln.text for _, ln in region)
        region.clear()

    for i, ln in enumerate(page.lines, 1):
        if ln.tag == "F":
            flush()
            out.append(ln.text)
        else:
            region.append((i, ln))
    flush()
    return out


# -- speaker segmentation ---------------------------------------------------

def default_speaker_patterns_path() -> Path:
    return Path(resources.files("agenda").joinpath("assets/speaker_patterns.txt"))


def load_speaker_patterns(path: str | Path | None = None) -> list[re.Pattern]:
    """Load speaker-introduction regexes, one per line, '#' comments allowed.

    Each pattern must define a named group ``name`` capturing the speaker.
    """
    path = Path(path) if path is not None else default_speaker_patterns_path()
    patterns = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            pat = re.compile(line)
        except re.error as exc:
            raise ParseError(f"{path}:{lineno}: bad pattern: {exc}") from exc
        if "name" not in pat.groupindex:
            raise ParseError(f"{path}:{lineno}: pattern lacks a (?P<name>...) group")
        patterns.append(pat)
    if not patterns:
        raise ParseError(f"{path}: no speaker patterns found")
    return patterns


def _normalize_speaker(raw: str) -> str:
    return re.sub(r"\s+", " ", raw).strip().upper()


def split_speakers(
    day_text: str | list[str],
    name_patterns: list[re.Pattern],
    *,
    chamber: str,
    date: dt.date,
) -> list[SpeakerTurn]:
    """Segment a day's text stream into speaker turns.

    Matches of the name patterns open turns in order of appearance; text
    before the first match belongs to the UNATTRIBUTED sentinel speaker.
    This never fails on arbitrary text, and turns whose text is empty after
    trimming are dropped.
    """
    text = day_text if isinstance(day_text, str) else "\n".join(day_text)
    matches = sorted(
        (m for pat in name_patterns for m in pat.finditer(text)),
        key=lambda m: (m.start(), m.end()),
    )
    # Drop overlapping matches, keeping the earliest-starting one.
    kept = []
    last_end = -1
    for m in matches:
        if m.start() >= last_end:
            kept.append(m)
            last_end = m.end()

    pieces: list[tuple[str, str]] = []
    if kept:
        head = text[: kept[0].start()]
        pieces.append((UNATTRIBUTED, head))
        for i, m in enumerate(kept):
            end = kept[i + 1].start() if i + 1 < len(kept) else len(text)
            pieces.append((_normalize_speaker(m.group("name")), text[m.end():end]))
    else:
        pieces.append((UNATTRIBUTED, text))

    turns = []
    for speaker, body in pieces:
        body = body.strip()
        if not body:
            continue
        turns.append(SpeakerTurn(speaker=speaker, date=date, chamber=chamber,
                                 text=body, turn_index=len(turns)))
    return turns


def parse_day(path: str | Path, name_patterns: list[re.Pattern]) -> list[SpeakerTurn]:
    """Load one page file, reflow its columns and split it into turns."""
    page = load_page(path)
    stream = reflow_columns(page)
    return split_speakers(stream, name_patterns, chamber=page.chamber, date=page.date)


# -- tidy CSV ----------------------------------------------------------------

def write_tidy(turns: list[SpeakerTurn], path: str | Path) -> None:
    """Export turns to tidy CSV: one row per turn, RFC-4180 quoting."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIDY_HEADER)
        for t in turns:
            writer.writerow([t.date.isoformat(), t.chamber, t.speaker, t.text])


def read_tidy(path: str | Path) -> list[SpeakerTurn]:
    """Read a tidy CSV back into turns; turn_index is order within (chamber, date)."""
    turns: list[SpeakerTurn] = []
    counters: dict[tuple[str, dt.date], int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TIDY_HEADER:
            raise ParseError(f"{path}: expected header {TIDY_HEADER}, got {header}")
        for row in reader:
            if len(row) != 4:
                raise ParseError(f"{path}: malformed row {row!r}")
            date = dt.date.fromisoformat(row[0])
            chamber = row[1]
            if chamber not in CHAMBERS:
                raise ParseError(f"{path}: unknown chamber {chamber!r}")
            key = (chamber, date)
            idx = counters.get(key, 0)
            counters[key] = idx + 1
            turns.append(SpeakerTurn(speaker=row[2], date=date, chamber=chamber,
                                     text=row[3], turn_index=idx))
    return turns
