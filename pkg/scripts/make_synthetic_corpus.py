#!/usr/bin/env python3
"""Regenerate the synthetic demo corpus shipped under data/synthetic_corpus.

200 chamber-days (100 sitting dates, both chambers) drawn from a correlated
topic model with 6 topics, plus a matching timeline (3 governments over 4
elections) and a CAP scheme for the 6 topics. Deterministic: rerunning this
script reproduces the committed files byte for byte.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from agenda.synthdata import simulate_corpus_assets  # noqa: E402

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "data" / "synthetic_corpus"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=DEFAULT_OUT)
    parser.add_argument("--seed", type=int, default=20180824)
    args = parser.parse_args()
    simulate_corpus_assets(args.out, n_dates=100, days_per_period=4, K=6,
                           V=160, tokens_per_day=260, n_governments=3,
                           n_elections=4, family="ctm", seed=args.seed)
    print(f"synthetic corpus written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
