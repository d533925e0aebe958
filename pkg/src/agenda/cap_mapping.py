"""Aggregate fitted topic shares into Comparative Agendas Project groups.

A mapping scheme assigns every fitted topic (1-based ids, matching the
human-facing topic tables) to one CAP major-topic code from the master
codebook. Aggregation sums member-topic shares per group, preserving row
sums exactly, then applies a small floor and renormalizes so downstream
Dirichlet likelihoods never see boundary zeros.
"""
from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

# CAP master codebook major topics (v1.0 numbering; 11 and 22 do not exist).
CAP_CODEBOOK: dict[int, str] = {
    1: "Macroeconomics",
    2: "Civil Rights",
    3: "Health",
    4: "Agriculture",
    5: "Labor",
    6: "Education",
    7: "Environment",
    8: "Energy",
    9: "Immigration",
    10: "Transportation",
    12: "Law and Crime",
    13: "Social Welfare",
    14: "Housing",
    15: "Domestic Commerce",
    16: "Defense",
    17: "Technology",
    18: "Foreign Trade",
    19: "International Affairs",
    20: "Government Operations",
    21: "Public Lands",
    23: "Culture",
}

ZERO_FLOOR = 1e-6


def default_scheme_path() -> Path:
    return Path(resources.files("agenda").joinpath("assets/cap_scheme_table1.csv"))


@dataclass
class CapScheme:
    entries: dict[int, tuple[int, str]]  # topic_id -> (cap_code, cap_name)

    def __post_init__(self):
        for tid, (code, name) in self.entries.items():
            if code not in CAP_CODEBOOK:
                raise ValueError(f"topic {tid}: cap_code {code} not in the "
                                 "CAP master codebook")
            if name.strip().lower() != CAP_CODEBOOK[code].lower():
                raise ValueError(
                    f"topic {tid}: cap_name {name!r} does not match codebook "
                    f"name {CAP_CODEBOOK[code]!r} for code {code}")

    @property
    def group_codes(self) -> list[int]:
        return sorted({code for code, _ in self.entries.values()})

    @property
    def group_names(self) -> list[str]:
        return [CAP_CODEBOOK[c] for c in self.group_codes]

    @property
    def P(self) -> int:
        return len(self.group_codes)

    def topic_ids(self) -> list[int]:
        return sorted(self.entries)


def load_scheme(path: str | Path) -> CapScheme:
    """Read a scheme CSV with header topic_id,cap_code,cap_name."""
    entries: dict[int, tuple[int, str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"topic_id", "cap_code", "cap_name"
                                             } <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header topic_id,cap_code,cap_name")
        for row in reader:
            tid = int(row["topic_id"])
            if tid in entries:
                raise ValueError(f"{path}: duplicate topic_id {tid}")
            entries[tid] = (int(row["cap_code"]), row["cap_name"])
    if not entries:
        raise ValueError(f"{path}: empty scheme")
    scheme = CapScheme(entries)
    if scheme.P < 2:
        raise ValueError(f"{path}: scheme maps everything to one group")
    return scheme


def save_scheme(scheme: CapScheme, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["topic_id", "cap_code", "cap_name"])
        for tid in scheme.topic_ids():
            code, name = scheme.entries[tid]
            writer.writerow([tid, code, name])


def aggregate(theta: np.ndarray, scheme: CapScheme, floor: float = ZERO_FLOOR,
              ) -> np.ndarray:
    """Sum topic shares into CAP-group shares (groups ordered by cap code).

    Topic column j holds topic id j+1. Before the floor is applied, each
    output row sums exactly to the input row sum; the floor then bounds the
    result away from the simplex boundary and rows are renormalized.
    """
    theta = np.asarray(theta, dtype=np.float64)
    K = theta.shape[1]
    want = set(range(1, K + 1))
    have = set(scheme.entries)
    if want != have:
        missing = sorted(want - have)
        extra = sorted(have - want)
        raise ValueError(f"scheme does not cover the fit's topics: "
                         f"missing {missing}, extra {extra}")
    codes = scheme.group_codes
    col_of_code = {c: i for i, c in enumerate(codes)}
    out = np.zeros((theta.shape[0], len(codes)))
    for tid, (code, _) in scheme.entries.items():
        out[:, col_of_code[code]] += theta[:, tid - 1]
    if floor > 0:
        out = np.maximum(out, floor)
        out /= out.sum(axis=1, keepdims=True)
    return out


# -- the day-by-group panel -----------------------------------------------------

@dataclass(frozen=True)
class PanelRow:
    chamber: str
    date: dt.date
    period: int      # sitting period id
    government: int  # government id from the timeline
    election: int    # election id from the timeline


@dataclass
class ThetaPanel:
    rows: list[PanelRow]
    shares: np.ndarray               # D x P
    group_codes: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.shares = np.asarray(self.shares, dtype=np.float64)
        if self.shares.shape[0] != len(self.rows):
            raise ValueError("share matrix and row metadata disagree")
        if not np.allclose(self.shares.sum(axis=1), 1.0, atol=1e-8):
            raise ValueError("panel rows must sum to 1")
        if (self.shares <= 0).any():
            raise ValueError("panel shares must be strictly positive")

    @property
    def P(self) -> int:
        return self.shares.shape[1]


def write_panel(panel: ThetaPanel, path: str | Path) -> None:
    """Panel CSV: chamber,date,period_id,government_id,election_id,share_1..P."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["chamber", "date", "period_id", "government_id",
                         "election_id"]
                        + [f"share_{p}" for p in range(1, panel.P + 1)])
        for row, share in zip(panel.rows, panel.shares):
            writer.writerow([row.chamber, row.date.isoformat(), row.period,
                             row.government, row.election]
                            + [f"{v:.17g}" for v in share])


def read_panel(path: str | Path, group_codes: list[int] | None = None,
               ) -> ThetaPanel:
    rows: list[PanelRow] = []
    shares = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        share_cols = [i for i, h in enumerate(header) if h.startswith("share_")]
        if not share_cols:
            raise ValueError(f"{path}: no share columns")
        for rec in reader:
            rows.append(PanelRow(chamber=rec[0],
                                 date=dt.date.fromisoformat(rec[1]),
                                 period=int(rec[2]), government=int(rec[3]),
                                 election=int(rec[4])))
            shares.append([float(rec[i]) for i in share_cols])
    return ThetaPanel(rows=rows, shares=np.asarray(shares),
                      group_codes=list(group_codes or []))
