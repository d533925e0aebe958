"""Synthetic data generation: fake vocabularies, tagged page files, sitting
calendars, timelines and CAP schemes sized to a synthetic corpus.

These generators exist so the whole pipeline can be exercised end to end on
data shipped with the repository. Pages are rendered in the same tagged
two-column format the parser consumes, with rotating speaker introductions,
digit-only banner lines and punctuation noise that the preprocessing stage
strips again.
"""
from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

from .cap_mapping import CAP_CODEBOOK, CapScheme
from .corpus import PreprocessConfig, derive_sitting_periods
from .record_parser import CHAMBERS
from .rng import generator
from .timeline import Election, Government, Timeline
from .topic_models import GenerativeTruth, generate_corpus, softmax_shares

_SYLLABLES = ["ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
              "ka", "ke", "ki", "ko", "ku", "la", "le", "li", "lo", "lu",
              "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no", "nu",
              "ra", "re", "ri", "ro", "ru", "sa", "se", "si", "so", "su",
              "ta", "te", "ti", "to", "tu", "va", "ve", "vi", "vo", "vu"]

_SPEAKERS = ["BARTON", "DEAKIN", "WATSON", "REID", "FISHER", "COOK",
             "HUGHES", "BRUCE", "SCULLIN", "LYONS", "MENZIES", "CURTIN",
             "CHIFLEY", "HOLT", "GORTON", "WHITLAM", "FRASER", "HAWKE"]


def synthetic_words(n: int, forbidden: frozenset[str] = frozenset()) -> list[str]:
    """n distinct pronounceable fake words, three syllables each."""
    words: list[str] = []
    seen = set(forbidden)
    i = 0
    base = len(_SYLLABLES)
    while len(words) < n:
        a, rem = divmod(i, base * base)
        b, c = divmod(rem, base)
        w = _SYLLABLES[a % base] + _SYLLABLES[b] + _SYLLABLES[c]
        i += 1
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def make_sitting_dates(n_dates: int, days_per_period: int,
                       start: dt.date = dt.date(1951, 2, 6)) -> list[dt.date]:
    """Sitting dates grouped into periods of days_per_period consecutive
    days, with an eight-day gap between periods."""
    dates = []
    for i in range(n_dates):
        s, j = divmod(i, days_per_period)
        dates.append(start + dt.timedelta(days=s * (days_per_period + 8) + j))
    return dates


def timeline_for_periods(period_first_days: list[dt.date], n_governments: int,
                         n_elections: int) -> Timeline:
    """A synthetic timeline wrapping the given sitting periods: elections
    split the periods contiguously, governments split the elections."""
    S = len(period_first_days)
    E, G = n_elections, n_governments
    if not (1 <= G <= E <= S):
        raise ValueError("need 1 <= governments <= elections <= periods")
    base, extra = divmod(S, E)
    counts = [base + (1 if e < extra else 0) for e in range(E)]
    first_period = np.concatenate([[0], np.cumsum(counts)[:-1]])
    elections = [Election(eid=e + 1,
                          date=period_first_days[int(first_period[e])]
                          - dt.timedelta(days=3),
                          winner="Labor" if e % 2 else "Non-labor")
                 for e in range(E)]
    gbase, gextra = divmod(E, G)
    gcounts = [gbase + (1 if g < gextra else 0) for g in range(G)]
    gfirst = np.concatenate([[0], np.cumsum(gcounts)[:-1]])
    governments = []
    for g in range(G):
        start = elections[int(gfirst[g])].date
        end = elections[int(gfirst[g + 1])].date if g + 1 < G else None
        governments.append(Government(gid=g + 1, name=f"Gov {g + 1}",
                                      party="Labor" if g % 2 else "Non-labor",
                                      start=start, end=end))
    return Timeline(governments=governments, elections=elections)


def synthetic_scheme(K: int, n_groups: int = 5) -> CapScheme:
    """Round-robin mapping of K topics onto the first n_groups CAP codes."""
    codes = sorted(CAP_CODEBOOK)[:n_groups]
    entries = {tid: (codes[(tid - 1) % n_groups],
                     CAP_CODEBOOK[codes[(tid - 1) % n_groups]])
               for tid in range(1, K + 1)}
    return CapScheme(entries)


def render_page(chamber: str, date: dt.date, tokens: list[str],
                rg: np.random.Generator) -> str:
    """Render one day's tokens as a tagged two-column page file."""
    lines: list[str] = []
    pos = 0
    speaker_i = int(rg.integers(0, len(_SPEAKERS)))
    while pos < len(tokens):
        chunk = int(rg.integers(25, 60))
        speaker = _SPEAKERS[speaker_i % len(_SPEAKERS)]
        speaker_i += 1
        if chamber == "senate":
            header = f"Senator {speaker}—"
        else:
            header = f"Mr {speaker}—"
        body = tokens[pos:pos + chunk]
        pos += chunk
        text_lines = [header]
        for j in range(0, len(body), 8):
            words = body[j:j + 8]
            if rg.random() < 0.3:
                words = words + [str(rg.integers(1, 1000)) + "."]
            text_lines.append(" ".join(words) + ("," if rg.random() < 0.2 else ""))
        lines.extend(text_lines)

    out: list[str] = []
    region_size = 14
    page_no = 1
    for r0 in range(0, len(lines), region_size):
        region = lines[r0:r0 + region_size]
        half = (len(region) + 1) // 2
        left, right = region[:half], region[half:]
        out.append(f"F|--- {page_no} ---")
        page_no += 1
        for i in range(max(len(left), len(right))):
            if i < len(left):
                out.append("L|" + left[i])
            if i < len(right):
                out.append("R|" + right[i])
    return "\n".join(out) + "\n"


def simulate_corpus_assets(out_dir: str | Path, *, n_dates: int = 100,
                           days_per_period: int = 4, K: int = 6, V: int = 160,
                           tokens_per_day: int = 260, n_governments: int = 3,
                           n_elections: int = 4, family: str = "ctm",
                           seed: int = 0) -> Path:
    """Write a complete synthetic input set: tagged pages for both chambers,
    the matching timeline CSVs, a CAP scheme for K topics, and the
    generating truth. Returns the output directory."""
    from .timeline import save_elections, save_governments
    from .cap_mapping import save_scheme

    out_dir = Path(out_dir)
    (out_dir / "pages").mkdir(parents=True, exist_ok=True)
    (out_dir / "truth").mkdir(parents=True, exist_ok=True)
    rg = generator(seed)

    stop = PreprocessConfig.default().stopwords
    words = synthetic_words(V, forbidden=frozenset(stop))
    beta = rg.dirichlet(np.full(V, 0.08), size=K)
    if family == "ctm":
        # modest day-to-day variation: daily shares should wobble around the
        # period mean rather than jump, as in real sitting-day records
        sigma = 0.10 * np.eye(K - 1) + 0.05
        truth = GenerativeTruth(beta=beta, mu=np.zeros(K - 1), sigma=sigma)
    else:
        truth = GenerativeTruth(beta=beta, alpha=0.4)
    n_docs = n_dates * len(CHAMBERS)
    lengths = rg.integers(int(0.8 * tokens_per_day),
                          int(1.2 * tokens_per_day), size=n_docs)
    sim = generate_corpus(truth, lengths, seed=seed + 1, family=family)

    dates = make_sitting_dates(n_dates, days_per_period)
    # map canonical-order tokens back to term lists per document
    from .topic_models import expand_tokens
    tok_doc, tok_term = expand_tokens(sim.dtm)
    for d in range(n_docs):
        date = dates[d // len(CHAMBERS)]
        chamber = CHAMBERS[d % len(CHAMBERS)]
        terms = tok_term[tok_doc == d]
        toks = [words[t] for t in rg.permutation(terms)]
        page = render_page(chamber, date, toks, rg)
        (out_dir / "pages" / f"{chamber}_{date.isoformat()}.txt").write_text(
            page, encoding="utf-8")

    cal = derive_sitting_periods(dates)
    first_days = sorted({min(d for d in cal.days
                             if cal.period_of_day[d] == s)
                         for s in range(cal.period_count)})
    tl = timeline_for_periods(first_days, n_governments, n_elections)
    save_governments(tl.governments, out_dir / "governments.csv")
    save_elections(tl.elections, out_dir / "elections.csv")
    save_scheme(synthetic_scheme(K), out_dir / "scheme.csv")

    np.savetxt(out_dir / "truth" / "beta.csv", beta, fmt="%.10g", delimiter=",")
    np.savetxt(out_dir / "truth" / "theta.csv", sim.theta, fmt="%.10g",
               delimiter=",")
    (out_dir / "truth" / "words.txt").write_text(
        "".join(w + "\n" for w in words), encoding="utf-8")
    return out_dir
