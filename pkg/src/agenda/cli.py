"""Batch command-line front end for the pipeline.

Every subcommand is a pure function of its inputs, its config and a seed; it
writes its outputs plus a manifest into one output directory. Downstream
commands verify the upstream manifest before consuming an artifact directory
and refuse stale artifacts unless --force is given.

Exit codes: 0 ok, 2 input error, 3 model error, 64 usage.
"""
from __future__ import annotations

import argparse
import datetime as dt
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import (cap_mapping, corpus, diagnostics, event_model, manifest,
               record_parser, svgfig, synthdata, timeline, topic_models)
from .rng import DEFAULT_SEED

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3
EXIT_USAGE = 64


class InputError(Exception):
    pass


class ModelError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get("AGENDA_SEED")
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _check_artifact(path: Path, force: bool) -> None:
    """Refuse to consume a pipeline directory whose files no longer match its
    manifest."""
    if not (path / manifest.MANIFEST_NAME).is_file():
        return  # plain input directory, not a pipeline artifact
    stale = manifest.stale_outputs(path)
    if stale and not force:
        raise InputError(
            f"{path}: artifact is stale (files changed after the run: "
            f"{', '.join(stale)}); rerun the producing command or use --force")


def _collect_warnings(record) -> list[str]:
    return [str(w.message) for w in record]


# -- commands -------------------------------------------------------------------

def cmd_parse(args) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        raise InputError(f"{in_dir}: not a directory")
    pages = sorted(in_dir.glob("*.txt"))
    if not pages:
        raise InputError(f"{in_dir}: no page files (*.txt)")
    patterns = record_parser.load_speaker_patterns(args.patterns)
    turns: list[record_parser.SpeakerTurn] = []
    failures: list[str] = []
    for page in pages:
        try:
            turns.extend(record_parser.parse_day(page, patterns))
        except record_parser.ParseError as exc:
            if args.lenient:
                failures.append(str(exc))
            else:
                raise InputError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record_parser.write_tidy(turns, out_dir / "tidy.csv")
    manifest.write_manifest(out_dir, "parse",
                            {"lenient": bool(args.lenient),
                             "patterns": str(args.patterns or "default")},
                            inputs=pages, warnings=failures)
    print(f"parsed {len(pages)} pages -> {len(turns)} turns")
    return EXIT_OK


def cmd_preprocess(args) -> int:
    tidy_dir = Path(args.tidy_dir)
    _check_artifact(tidy_dir, args.force)
    tidy_csv = tidy_dir / "tidy.csv"
    if not tidy_csv.is_file():
        raise InputError(f"{tidy_csv}: missing")
    cfg_kv = corpus.read_key_value_config(args.config) if args.config else {}
    base = Path(args.config).parent if args.config else Path(".")
    paths = {}
    for key, default in (("stopwords_path", None), ("mwe_path", None),
                         ("substitutions_path", None)):
        if key in cfg_kv:
            paths[key] = (base / cfg_kv[key]).resolve()
        else:
            paths[key] = default
    min_count = int(args.min_term_count if args.min_term_count is not None
                    else cfg_kv.get("min_term_count", 5))
    if any(v is None for v in paths.values()):
        default_cfg = corpus.PreprocessConfig.default(min_count)
        cfg = corpus.PreprocessConfig(
            stopwords=(frozenset(corpus._read_word_list(paths["stopwords_path"]))
                       if paths["stopwords_path"] else default_cfg.stopwords),
            mwes=(tuple(corpus._read_word_list(paths["mwe_path"]))
                  if paths["mwe_path"] else default_cfg.mwes),
            substitutions=(tuple(corpus._read_substitutions(paths["substitutions_path"]))
                           if paths["substitutions_path"] else default_cfg.substitutions),
            min_term_count=min_count)
    else:
        cfg = corpus.PreprocessConfig.from_files(min_term_count=min_count, **paths)

    turns = record_parser.read_tidy(tidy_csv)
    if not turns:
        raise InputError(f"{tidy_csv}: no rows")
    vocab, dtm = corpus.build_matrix(turns, cfg)
    cal = corpus.calendar_from_docs(dtm.docs)
    out_dir = Path(args.out_dir)
    corpus.write_dtm(vocab, dtm, out_dir)
    corpus.write_calendar(cal, dtm.docs, out_dir / "calendar.csv")
    shares = corpus.stopword_share(turns)
    with open(out_dir / "stopword_share.csv", "w", encoding="utf-8",
              newline="") as fh:
        fh.write("chamber,date,share\n")
        for chamber, day, share in shares:
            fh.write(f"{chamber},{day.isoformat()},{share:.10g}\n")
    manifest.write_manifest(out_dir, "preprocess",
                            {"min_term_count": min_count,
                             "config": str(args.config or "default")},
                            inputs=[tidy_csv])
    print(f"{dtm.n_docs} documents, {len(vocab)} terms, "
          f"{cal.period_count} sitting periods")
    return EXIT_OK


def _load_dtm_dir(path_str: str, force: bool):
    dtm_dir = Path(path_str)
    _check_artifact(dtm_dir, force)
    if not (dtm_dir / "matrix.csv").is_file():
        raise InputError(f"{dtm_dir}: not a preprocess output directory")
    return corpus.read_dtm(dtm_dir)


def cmd_fit_topics(args) -> int:
    vocab, dtm = _load_dtm_dir(args.dtm_dir, args.force)
    seed = _resolve_seed(args)
    hyper = topic_models.LdaHyper(K=args.topics, alpha=args.alpha,
                                  eta=args.eta, iters=args.iters,
                                  burn_in=args.burn_in, seed=seed)
    out_dir = Path(args.out_dir)
    with warnings.catch_warnings(record=True) as record:
        warnings.simplefilter("always")
        try:
            if args.model == "ctm":
                fit, params = topic_models.fit_ctm(dtm, hyper)
            else:
                fit = topic_models.fit_lda(dtm, hyper)
                params = None
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise ModelError(str(exc)) from exc
    topic_models.save_fit(fit, out_dir, hyper=hyper, params=params,
                          model=args.model)
    manifest.write_manifest(out_dir, "fit-topics",
                            {"model": args.model, "K": args.topics,
                             "alpha": hyper.alpha_value, "eta": args.eta,
                             "iters": args.iters, "burn_in": args.burn_in},
                            inputs=[Path(args.dtm_dir) / "matrix.csv"],
                            seeds=[seed],
                            warnings=_collect_warnings(record))
    print(f"{args.model} fit: K={args.topics}, "
          f"final loglik {fit.loglik[-1]:.1f}")
    return EXIT_OK


def cmd_diagnostics(args) -> int:
    vocab, dtm = _load_dtm_dir(args.dtm_dir, args.force)
    try:
        k_list = [int(k) for k in args.k_list.split(",") if k]
    except ValueError as exc:
        raise InputError(f"bad K list {args.k_list!r}") from exc
    if not k_list:
        raise InputError("empty K list")
    seed = _resolve_seed(args)
    template = topic_models.LdaHyper(K=k_list[0], iters=args.iters,
                                     burn_in=args.burn_in, seed=seed)
    with warnings.catch_warnings(record=True) as record:
        warnings.simplefilter("always")
        try:
            reports = diagnostics.sweep_topics(dtm, k_list, template)
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    diagnostics.write_reports(reports, out_dir)
    svgfig.line_chart(
        out_dir / "exclusivity_vs_coherence.svg",
        series=[],
        scatter=[(f"K={r.K}", [r.coherence_mean], [r.exclusivity_mean])
                 for r in reports],
        title="Exclusivity against coherence over candidate topic counts",
        xlabel="semantic coherence (mean)", ylabel="exclusivity (mean)")
    manifest.write_manifest(out_dir, "diagnostics",
                            {"k_list": k_list, "iters": args.iters,
                             "burn_in": args.burn_in},
                            inputs=[Path(args.dtm_dir) / "matrix.csv"],
                            seeds=[seed],
                            warnings=_collect_warnings(record))
    print(f"swept {len(reports)} topic counts")
    return EXIT_OK


def cmd_map_cap(args) -> int:
    fit_dir = Path(args.fit_dir)
    _check_artifact(fit_dir, args.force)
    fit, _ = topic_models.load_fit(fit_dir)
    vocab, dtm = _load_dtm_dir(args.dtm_dir, args.force)
    cal = corpus.read_calendar(Path(args.dtm_dir) / "calendar.csv")
    scheme = cap_mapping.load_scheme(args.scheme or
                                     cap_mapping.default_scheme_path())
    tl = timeline.load_timeline(args.governments, args.elections)
    try:
        panel = event_model.build_panel(fit.theta, scheme, dtm.docs, cal, tl)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cap_mapping.write_panel(panel, out_dir / "panel.csv")
    with open(out_dir / "groups.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("cap_code,cap_name\n")
        for code in scheme.group_codes:
            fh.write(f"{code},{cap_mapping.CAP_CODEBOOK[code]}\n")
    manifest.write_manifest(out_dir, "map-cap",
                            {"scheme": str(args.scheme or "default"),
                             "P": scheme.P},
                            inputs=[fit_dir / "theta.csv"])
    print(f"panel: {len(panel.rows)} day-rows, {panel.P} groups")
    return EXIT_OK


def _load_panel_dir(path_str: str, force: bool) -> cap_mapping.ThetaPanel:
    panel_dir = Path(path_str)
    _check_artifact(panel_dir, force)
    panel_csv = panel_dir / "panel.csv"
    if not panel_csv.is_file():
        raise InputError(f"{panel_csv}: missing")
    return cap_mapping.read_panel(panel_csv)


def cmd_fit_events(args) -> int:
    panel = _load_panel_dir(args.panel_dir, args.force)
    tl = timeline.load_timeline(args.governments, args.elections)
    seed = _resolve_seed(args)
    spec = event_model.EventModelSpec(
        P=panel.P, chains=args.chains, iters=args.iters,
        burn_in=args.burn_in, thin=args.thin, seed=seed,
        prior_sd_alpha=args.prior_sd, prior_sd_beta=args.prior_sd)
    with warnings.catch_warnings(record=True) as record:
        warnings.simplefilter("always")
        try:
            post = event_model.fit(panel, tl, spec)
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    event_model.write_draws(post, out_dir / "draws.csv")
    event_model.write_summary(post, out_dir / "summary.csv")
    d = post.design
    conc = post.mean_concentration()
    tot = conc.sum(axis=1, keepdims=True)
    mean = conc / tot
    sd = np.sqrt(mean * (1 - mean) / (tot + 1))
    with open(out_dir / "cell_means.csv", "w", encoding="utf-8",
              newline="") as fh:
        fh.write("chamber,period_id,topic,share_mean,share_sd\n")
        for c in range(d.n_cells):
            for p in range(d.P):
                fh.write(f"{record_parser.CHAMBERS[d.cell_cham[c]]},"
                         f"{d.cell_period[c]},{p + 1},"
                         f"{mean[c, p]:.10g},{sd[c, p]:.10g}\n")
    manifest.write_manifest(
        out_dir, "fit-events",
        {"P": panel.P, "chains": args.chains, "iters": args.iters,
         "burn_in": args.burn_in, "thin": args.thin,
         "prior_sd": args.prior_sd,
         "rhat_warn": post.rhat_warn,
         "accept_rates": {k: round(v, 4) for k, v in post.accept_rates.items()}},
        inputs=[Path(args.panel_dir) / "panel.csv"], seeds=[seed],
        warnings=_collect_warnings(record))
    print(f"posterior: {post.n_draws} draws, accept rates "
          + ", ".join(f"{k}={v:.2f}" for k, v in post.accept_rates.items()))
    return EXIT_OK


def _reload_posterior(events_dir: Path, panel: cap_mapping.ThetaPanel,
                      tl: timeline.Timeline) -> event_model.EventPosterior:
    """Rebuild an EventPosterior from a fit-events draws.csv."""
    import csv as _csv

    design = event_model.build_design(panel, tl)
    draws: dict[str, dict[tuple[str, int], list[float]]] = {}
    chains = set()
    with open(events_dir / "draws.csv", newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        for row in reader:
            key = (row["unit"], int(row["topic"]))
            draws.setdefault(row["param"], {}).setdefault(key, []).append(
                float(row["value"]))
            chains.add(int(row["chain"]))

    def collect(name, labels):
        P = design.P
        any_key = next(iter(draws[name].values()))
        n = len(any_key)
        out = np.zeros((n, len(labels), P))
        for j, label in enumerate(labels):
            for p in range(P):
                out[:, j, p] = draws[name][(label, p + 1)]
        return out

    gov_labels = [f"g{g}" for g in design.gov_ids]
    elec_labels = [f"e{e}" for e in design.elec_ids]
    cell_labels = [f"{record_parser.CHAMBERS[design.cell_cham[c]]}:"
                   f"{design.cell_period[c]}" for c in range(design.n_cells)]
    alpha = collect("alpha", gov_labels)
    n = alpha.shape[0]
    per_chain = n // max(len(chains), 1)
    chain_ix = np.repeat(np.arange(len(chains)), per_chain)
    spec = event_model.EventModelSpec(P=design.P, chains=len(chains),
                                      iters=2 * per_chain, burn_in=0,
                                      thin=2)
    return event_model.EventPosterior(
        alpha=alpha, beta=collect("beta", elec_labels),
        delta=collect("delta", cell_labels), mu=collect("mu",
                                                        list(record_parser.CHAMBERS)),
        sigma=collect("sigma", gov_labels), chain=chain_ix, design=design,
        spec=spec, accept_rates={}, loglik=np.zeros((len(chains), 1)))


def cmd_compare(args) -> int:
    panel = _load_panel_dir(args.panel_dir, args.force)
    tl = timeline.load_timeline(args.governments, args.elections)
    events_dir = Path(args.events_dir)
    _check_artifact(events_dir, args.force)
    post = _reload_posterior(events_dir, panel, tl)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    levels = (["government", "election"] if args.level == "both"
              else [args.level])
    all_rows = []
    for level in levels:
        rows = event_model.compare_neighbors(post, tl, level)
        all_rows.extend(rows)
        table_name = ("governments_different.csv" if level == "government"
                      else "elections_different.csv")
        event_model.write_flagged_units_table(rows, tl, out_dir / table_name)
    event_model.write_comparisons(all_rows, out_dir / "comparisons.csv")
    manifest.write_manifest(out_dir, "compare", {"level": args.level},
                            inputs=[events_dir / "draws.csv"])
    n_diff = sum(r.different for r in all_rows)
    print(f"{len(all_rows)} comparisons, {n_diff} different")
    return EXIT_OK


def cmd_outliers(args) -> int:
    panel = _load_panel_dir(args.panel_dir, args.force)
    tl = timeline.load_timeline(args.governments, args.elections)
    events_dir = Path(args.events_dir)
    _check_artifact(events_dir, args.force)
    post = _reload_posterior(events_dir, panel, tl)
    days = event_model.detect_outlier_days(panel, post,
                                           threshold=args.threshold)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    event_model.write_outliers(days, out_dir / "outliers.csv")
    manifest.write_manifest(out_dir, "outliers",
                            {"threshold": args.threshold},
                            inputs=[events_dir / "draws.csv"])
    print(f"{len(days)} outlier days")
    return EXIT_OK


def cmd_figures(args) -> int:
    panel = _load_panel_dir(args.panel_dir, args.force)
    events_dir = Path(args.events_dir)
    _check_artifact(events_dir, args.force)
    cell_means = {}
    with open(events_dir / "cell_means.csv", newline="",
              encoding="utf-8") as fh:
        import csv as _csv
        for row in _csv.DictReader(fh):
            cell_means[(row["chamber"], int(row["period_id"]),
                        int(row["topic"]))] = float(row["share_mean"])
    topics = [int(t) for t in args.topics.split(",") if t]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    day_numbers = {row.date: (row.date - panel.rows[0].date).days
                   for row in panel.rows}
    for p in topics:
        if not 1 <= p <= panel.P:
            raise InputError(f"topic {p} out of range 1..{panel.P}")
        series, scatter, csv_rows = [], [], []
        for chamber in record_parser.CHAMBERS:
            xs = [day_numbers[row.date] for row in panel.rows
                  if row.chamber == chamber]
            if not xs:
                continue
            ys = [float(panel.shares[i, p - 1])
                  for i, row in enumerate(panel.rows)
                  if row.chamber == chamber]
            mx = [day_numbers[row.date] for row in panel.rows
                  if row.chamber == chamber]
            my = [cell_means[(chamber, row.period, p)]
                  for row in panel.rows if row.chamber == chamber]
            scatter.append((f"{chamber} daily", xs, ys))
            series.append((f"{chamber} period mean", mx, my))
            for i, row in enumerate(panel.rows):
                if row.chamber == chamber:
                    csv_rows.append((chamber, row.date, row.period,
                                     panel.shares[i, p - 1],
                                     cell_means[(chamber, row.period, p)]))
        with open(out_dir / f"prevalence_topic{p}.csv", "w",
                  encoding="utf-8", newline="") as fh:
            fh.write("chamber,date,period_id,daily_share,period_mean\n")
            for chamber, date, s, daily, mean in csv_rows:
                fh.write(f"{chamber},{date.isoformat()},{s},"
                         f"{daily:.10g},{mean:.10g}\n")
        svgfig.line_chart(out_dir / f"prevalence_topic{p}.svg",
                          series=series, scatter=scatter,
                          title=f"Topic {p} prevalence by sitting period",
                          xlabel="days since first sitting",
                          ylabel="share of discussion")

    # effect interval charts from the posterior summary
    import csv as _csv
    summary = {}
    with open(events_dir / "summary.csv", newline="", encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            summary.setdefault(row["param"], []).append(row)
    for param, fname in (("alpha", "effects_government"),
                         ("beta", "effects_election")):
        rows = [r for r in summary.get(param, [])
                if int(r["topic"]) in topics]
        groups = []
        for p in topics:
            entries = [(r["unit"], float(r["mean"]), float(r["q025"]),
                        float(r["q975"]))
                       for r in rows if int(r["topic"]) == p]
            groups.append((f"topic {p}", entries))
        with open(out_dir / f"{fname}.csv", "w", encoding="utf-8",
                  newline="") as fh:
            fh.write("unit,topic,mean,q025,q975\n")
            for label, entries in groups:
                p = label.split()[-1]
                for unit, mean, lo, hi in entries:
                    fh.write(f"{unit},{p},{mean:.10g},{lo:.10g},{hi:.10g}\n")
        svgfig.interval_chart(out_dir / f"{fname}.svg", groups,
                              title=f"{param} effects with 95% intervals",
                              xlabel="unit", ylabel="effect (log scale)")
    manifest.write_manifest(out_dir, "figures", {"topics": topics},
                            inputs=[events_dir / "summary.csv"])
    print(f"figures for topics {topics}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    out_dir = Path(args.out_dir)
    if args.what == "corpus":
        synthdata.simulate_corpus_assets(
            out_dir, n_dates=args.days, K=args.topics, V=args.vocab,
            tokens_per_day=args.tokens_per_day,
            n_governments=args.n_governments, n_elections=args.n_elections,
            days_per_period=args.days_per_period, family=args.family,
            seed=seed)
        manifest.write_manifest(out_dir, "simulate-corpus",
                                {"days": args.days, "K": args.topics,
                                 "V": args.vocab, "family": args.family},
                                inputs=[], seeds=[seed])
        print(f"synthetic corpus in {out_dir}")
    else:
        rg = np.random.default_rng(seed)
        P, G, E = args.groups, args.n_governments, args.n_elections
        truth = event_model.EventTruth(
            alpha=2.5 + 0.4 * rg.standard_normal((G, P)),
            beta=0.08 * rg.standard_normal((E, P)),
            mu=np.zeros((2, P)),
            sigma=rg.uniform(0.08, 0.3, size=(G, P)))
        sim = event_model.simulate_panel(truth, n_periods=args.periods,
                                         days_per_period=args.days_per_period,
                                         seed=seed)
        out_dir.mkdir(parents=True, exist_ok=True)
        cap_mapping.write_panel(sim.panel, out_dir / "panel.csv")
        timeline.save_governments(sim.timeline.governments,
                                  out_dir / "governments.csv")
        timeline.save_elections(sim.timeline.elections,
                                out_dir / "elections.csv")
        np.savez(out_dir / "truth.npz", alpha=truth.alpha, beta=truth.beta,
                 mu=truth.mu, sigma=truth.sigma, delta=sim.delta)
        manifest.write_manifest(out_dir, "simulate-panel",
                                {"P": P, "periods": args.periods},
                                inputs=[], seeds=[seed])
        print(f"synthetic panel in {out_dir}")
    return EXIT_OK


# -- argument wiring -----------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="agenda",
                     description="transcript-to-event-effects pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to AGENDA_SEED, then default)")
        p.add_argument("--force", action="store_true",
                       help="consume stale upstream artifacts anyway")
        p.add_argument("--threads", type=int, default=None,
                       help="cap worker threads")

    p = sub.add_parser("parse", help="pages -> tidy speaker turns")
    p.add_argument("in_dir")
    p.add_argument("out_dir")
    p.add_argument("--patterns", default=None,
                   help="speaker pattern file (default: packaged patterns)")
    p.add_argument("--lenient", action="store_true",
                   help="skip unparseable pages instead of failing")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("preprocess", help="tidy turns -> document-term matrix")
    p.add_argument("tidy_dir")
    p.add_argument("out_dir")
    p.add_argument("--config", default=None, help="key-value config file")
    p.add_argument("--min-term-count", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fit-topics", help="fit LDA or CTM")
    p.add_argument("dtm_dir")
    p.add_argument("out_dir")
    p.add_argument("--model", choices=["lda", "ctm"], default="ctm")
    p.add_argument("--topics", type=int, default=80)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=400)
    p.add_argument("--burn-in", type=int, default=200)
    common(p)
    p.set_defaults(func=cmd_fit_topics)

    p = sub.add_parser("diagnostics", help="sweep candidate topic counts")
    p.add_argument("dtm_dir")
    p.add_argument("out_dir")
    p.add_argument("--k-list", required=True, help="comma-separated K values")
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--burn-in", type=int, default=150)
    common(p)
    p.set_defaults(func=cmd_diagnostics)

    p = sub.add_parser("map-cap", help="aggregate topic shares to CAP groups")
    p.add_argument("fit_dir")
    p.add_argument("dtm_dir")
    p.add_argument("out_dir")
    p.add_argument("--scheme", default=None,
                   help="scheme CSV (default: packaged 80-topic scheme)")
    p.add_argument("--governments", default=None)
    p.add_argument("--elections", default=None)
    common(p)
    p.set_defaults(func=cmd_map_cap)

    p = sub.add_parser("fit-events", help="fit the event analysis model")
    p.add_argument("panel_dir")
    p.add_argument("out_dir")
    p.add_argument("--governments", default=None)
    p.add_argument("--elections", default=None)
    p.add_argument("--chains", type=int, default=2)
    p.add_argument("--iters", type=int, default=4000)
    p.add_argument("--burn-in", type=int, default=2000)
    p.add_argument("--thin", type=int, default=2)
    p.add_argument("--prior-sd", type=float, default=10.0)
    common(p)
    p.set_defaults(func=cmd_fit_events)

    p = sub.add_parser("compare", help="credible-interval neighbour comparisons")
    p.add_argument("events_dir")
    p.add_argument("panel_dir")
    p.add_argument("out_dir")
    p.add_argument("--level", choices=["government", "election", "both"],
                   default="both")
    p.add_argument("--governments", default=None)
    p.add_argument("--elections", default=None)
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("outliers", help="flag days far from their period mean")
    p.add_argument("events_dir")
    p.add_argument("panel_dir")
    p.add_argument("out_dir")
    p.add_argument("--threshold", type=float, default=3.0)
    p.add_argument("--governments", default=None)
    p.add_argument("--elections", default=None)
    common(p)
    p.set_defaults(func=cmd_outliers)

    p = sub.add_parser("figures", help="per-figure CSV + SVG")
    p.add_argument("events_dir")
    p.add_argument("panel_dir")
    p.add_argument("out_dir")
    p.add_argument("--topics", default="1",
                   help="comma-separated 1-based CAP group numbers")
    common(p)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("simulate", help="generate synthetic inputs")
    p.add_argument("what", choices=["corpus", "panel"])
    p.add_argument("out_dir")
    p.add_argument("--days", type=int, default=100,
                   help="sitting dates (corpus)")
    p.add_argument("--topics", type=int, default=6)
    p.add_argument("--vocab", type=int, default=160)
    p.add_argument("--tokens-per-day", type=int, default=260)
    p.add_argument("--family", choices=["lda", "ctm"], default="ctm")
    p.add_argument("--groups", type=int, default=4, help="P (panel)")
    p.add_argument("--periods", type=int, default=60)
    p.add_argument("--days-per-period", type=int, default=4)
    p.add_argument("--n-governments", type=int, default=3)
    p.add_argument("--n-elections", type=int, default=4)
    common(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None):
        import numba
        numba.set_num_threads(max(1, args.threads))
    try:
        return args.func(args)
    except InputError as exc:
        print(f"agenda {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (record_parser.ParseError, FileNotFoundError) as exc:
        print(f"agenda {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelError as exc:
        print(f"agenda {args.command}: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
