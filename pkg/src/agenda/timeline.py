"""Government terms and elections: the event timeline the analysis model
conditions on.

The shipped assets cover the Australian Federal Parliament 1901-2018: 45
elections and 36 prime-ministerial periods. A handful of caretaker terms that
followed a death in office (and one very short return term) are marked
excluded: they are still fitted, but neighbour comparisons skip over them to
the explicitly recorded comparison predecessor.
"""
from __future__ import annotations

import csv
import datetime as dt
from bisect import bisect_right
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path


def default_governments_path() -> Path:
    return Path(resources.files("agenda").joinpath("assets/governments.csv"))


def default_elections_path() -> Path:
    return Path(resources.files("agenda").joinpath("assets/elections.csv"))


@dataclass(frozen=True)
class Government:
    gid: int
    name: str
    party: str
    start: dt.date
    end: dt.date | None          # None: open-ended (current) term
    excluded: bool = False
    compare_to: int | None = None  # explicit comparison predecessor


@dataclass(frozen=True)
class Election:
    eid: int
    date: dt.date
    winner: str
    seats: int | None = None
    n_periods: int | None = None  # sitting periods in this election period


@dataclass
class Timeline:
    governments: list[Government]
    elections: list[Election]
    _gov_starts: list[dt.date] = field(init=False, repr=False)
    _elec_dates: list[dt.date] = field(init=False, repr=False)

    def __post_init__(self):
        self.governments = sorted(self.governments, key=lambda g: g.start)
        self.elections = sorted(self.elections, key=lambda e: e.date)
        for a, b in zip(self.governments, self.governments[1:]):
            if a.end is None:
                raise ValueError(f"government {a.name} is open-ended but "
                                 f"{b.name} follows it")
            if a.end > b.start:
                raise ValueError(f"government intervals overlap: {a.name}, {b.name}")
        excluded = {g.gid for g in self.governments if g.excluded}
        by_id = {g.gid for g in self.governments}
        for g in self.governments:
            if g.compare_to is not None:
                if g.compare_to not in by_id:
                    raise ValueError(f"{g.name}: compare_to {g.compare_to} unknown")
                if g.compare_to in excluded:
                    raise ValueError(f"{g.name}: compare_to points at an "
                                     "excluded government")
        if len({g.gid for g in self.governments}) != len(self.governments):
            raise ValueError("duplicate government ids")
        if len({e.eid for e in self.elections}) != len(self.elections):
            raise ValueError("duplicate election ids")
        self._gov_starts = [g.start for g in self.governments]
        self._elec_dates = [e.date for e in self.elections]

    def government_of(self, day: dt.date) -> Government:
        """Government in office on a day; a term covers [start, end)."""
        i = bisect_right(self._gov_starts, day) - 1
        if i < 0:
            raise ValueError(f"{day} is before the first government")
        g = self.governments[i]
        if g.end is not None and day >= g.end and i == len(self.governments) - 1:
            raise ValueError(f"{day} is after the last government")
        return g

    def election_of(self, day: dt.date) -> Election:
        """Election period containing a day: [election date, next date)."""
        i = bisect_right(self._elec_dates, day) - 1
        if i < 0:
            raise ValueError(f"{day} is before the first election")
        return self.elections[i]

    def comparison_pairs(self, level: str) -> list[tuple[int, int]]:
        """Adjacent (earlier_id, later_id) pairs to compare.

        At government level excluded terms are skipped: each non-excluded
        government after the first is paired with its compare_to target if
        set, else the nearest preceding non-excluded government. Elections
        are compared pairwise in date order.
        """
        if level == "government":
            pairs = []
            kept = [g for g in self.governments if not g.excluded]
            for i, g in enumerate(kept[1:], 1):
                earlier = g.compare_to if g.compare_to is not None else kept[i - 1].gid
                pairs.append((earlier, g.gid))
            return pairs
        if level == "election":
            return [(a.eid, b.eid) for a, b in zip(self.elections,
                                                   self.elections[1:])]
        raise ValueError(f"unknown comparison level {level!r}")

    def government_by_id(self, gid: int) -> Government:
        for g in self.governments:
            if g.gid == gid:
                return g
        raise KeyError(gid)

    def election_by_id(self, eid: int) -> Election:
        for e in self.elections:
            if e.eid == eid:
                return e
        raise KeyError(eid)

    def with_period_counts(self, period_first_days: list[dt.date]) -> "Timeline":
        """Attach the number of sitting periods falling in each election
        period, given the first sitting day of every period."""
        counts = {e.eid: 0 for e in self.elections}
        for day in period_first_days:
            counts[self.election_of(day).eid] += 1
        elections = [replace(e, n_periods=counts[e.eid]) for e in self.elections]
        return Timeline(governments=self.governments, elections=elections)


def load_governments(path: str | Path | None = None) -> list[Government]:
    """Read governments CSV: id,name,party,start,end,excluded,compare_to.

    An empty end marks an open-ended term; an empty compare_to means the
    immediate non-excluded predecessor.
    """
    path = Path(path) if path is not None else default_governments_path()
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"id", "name", "party", "start", "end", "excluded", "compare_to"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(need)}")
        for row in reader:
            out.append(Government(
                gid=int(row["id"]),
                name=row["name"],
                party=row["party"],
                start=dt.date.fromisoformat(row["start"]),
                end=dt.date.fromisoformat(row["end"]) if row["end"] else None,
                excluded=row["excluded"].strip().lower() in ("1", "true", "yes"),
                compare_to=int(row["compare_to"]) if row["compare_to"] else None,
            ))
    if not out:
        raise ValueError(f"{path}: no governments")
    return out


def load_elections(path: str | Path | None = None) -> list[Election]:
    """Read elections CSV: id,date,winner (extra columns tolerated)."""
    path = Path(path) if path is not None else default_elections_path()
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"id", "date", "winner"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(need)}")
        for row in reader:
            seats = row.get("seats")
            out.append(Election(
                eid=int(row["id"]),
                date=dt.date.fromisoformat(row["date"]),
                winner=row["winner"],
                seats=int(seats) if seats else None,
            ))
    if not out:
        raise ValueError(f"{path}: no elections")
    return out


def load_timeline(governments_path=None, elections_path=None) -> Timeline:
    return Timeline(governments=load_governments(governments_path),
                    elections=load_elections(elections_path))


def save_governments(governments: list[Government], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "name", "party", "start", "end", "excluded",
                         "compare_to"])
        for g in governments:
            writer.writerow([
                g.gid, g.name, g.party, g.start.isoformat(),
                g.end.isoformat() if g.end else "",
                "true" if g.excluded else "false",
                g.compare_to if g.compare_to is not None else "",
            ])


def save_elections(elections: list[Election], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "date", "winner", "seats"])
        for e in elections:
            writer.writerow([e.eid, e.date.isoformat(), e.winner,
                             e.seats if e.seats is not None else ""])
