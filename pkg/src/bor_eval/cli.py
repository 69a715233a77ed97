"""Command-line interface.

Every report goes out in a versioned envelope (schema_version, tool,
command, parameters, timestamp, warnings, payload).  Table output rounds
bits to two decimals for reading; json and csv carry full precision.

Exit codes: 0 success, 2 invalid invocation, 3 unparseable input,
4 no evaluable queries.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__, advisor, bm25, simulate
from .evaluator import NoEvaluableQueriesError, SuccessRule, evaluate, depth_sweep
from .ingest import ParseError, class_relevance, extract_subject, parse_corpus, \
    parse_qrels, parse_run, write_qrels, write_run
from .metrics import bor, bor_recall, ceilings, neg_log2
from .probability import BaselineParams, lambda_rate, mean_probability, \
    p_rand_at_least_m, p_rand_poisson
from .simulate import TrialConfig, monte_carlo_p

EXIT_PARSE = 3
EXIT_NO_QUERIES = 4

_FORMATS = click.Choice(["table", "json", "csv"])


def _envelope(command: str, params: dict, payload, warnings: list[str]) -> dict:
    return {
        "schema_version": 1,
        "tool": "bor-eval",
        "version": __version__,
        "command": command,
        "params": params,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "warnings": warnings,
        "payload": payload,
    }


def _emit(fmt: str, command: str, params: dict, payload, warnings: list[str],
          table_lines: list[str], csv_rows: list[dict]) -> None:
    if fmt == "json":
        click.echo(json.dumps(_envelope(command, params, payload, warnings), indent=2))
        return
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        if csv_rows:
            writer.writerow(list(csv_rows[0]))
            for row in csv_rows:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row.values()])
        return
    for line in table_lines:
        click.echo(line)
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)


def _read_rq_values(values: tuple[str, ...]) -> list[int]:
    out: list[int] = []
    for value in values:
        if value.startswith("@"):
            path = Path(value[1:])
            if not path.exists():
                raise click.UsageError(f"relevant-count file not found: {path}")
            for lineno, line in enumerate(path.read_text().splitlines(), start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(int(line))
                except ValueError:
                    click.echo(f"error: {path}:{lineno}: not an integer: {line!r}", err=True)
                    sys.exit(EXIT_PARSE)
        else:
            try:
                out.append(int(value))
            except ValueError:
                raise click.UsageError(f"--rq expects an integer or @file, got {value!r}")
    if not out:
        raise click.UsageError("no relevant counts supplied")
    return out


def _bits(x: float) -> str:
    return f"{x:.2f}"


@click.group()
@click.version_option(__version__, prog_name="bor-eval")
def main() -> None:
    """Chance-corrected selectivity evaluation for retrieval systems."""


@main.command("ceiling")
@click.option("--n", type=int, required=True, help="Corpus size.")
@click.option("--rq", "rq_values", multiple=True, required=True,
              help="Per-query relevant count; repeatable, or @file with one per line.")
@click.option("--k", type=int, required=True, help="Retrieval depth.")
@click.option("--m", type=int, default=1, show_default=True, help="Hits required for success.")
@click.option("--format", "fmt", type=_FORMATS, default="table", show_default=True)
def cmd_ceiling(n: int, rq_values: tuple[str, ...], k: int, m: int, fmt: str) -> None:
    """Maximum attainable BoR for a query population at one depth."""
    rqs = _read_rq_values(rq_values)
    warnings: list[str] = []
    zero = sum(1 for r in rqs if r == 0)
    if zero:
        warnings.append(f"{zero} queries with no relevant documents were excluded")
        rqs = [r for r in rqs if r > 0]
    if not rqs:
        click.echo("error: every query has zero relevant documents", err=True)
        sys.exit(EXIT_NO_QUERIES)
    try:
        baselines = [p_rand_at_least_m(BaselineParams(n, r, k, m)) for r in rqs]
        report = ceilings(baselines, n, k)
        mean_rq = sum(rqs) / len(rqs)
        lam = lambda_rate(n, mean_rq, k)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    mean_base = mean_probability(baselines)
    payload = {
        "n": n, "k": k, "m": m, "query_count": len(rqs), "excluded_zero_r": zero,
        "mean_relevant": mean_rq, "lambda": lam,
        "mean_baseline": dataclasses.asdict(mean_base),
        "ceilings": dataclasses.asdict(report),
        "poisson_ceiling_bits": neg_log2(p_rand_poisson(lam, m)),
    }
    table = [
        f"queries          {len(rqs)}  (excluded zero-R: {zero})",
        f"mean baseline    {mean_base.value:.5f}",
        f"lambda           {lam:.3f}",
        f"bor_max          {_bits(report.bor_max_mean_of_logs)} bits  (mean of per-query ceilings)",
        f"bor_max (agg)    {_bits(report.bor_max_log_of_mean)} bits  (-log2 of mean baseline)",
        f"bor_opt          {_bits(report.bor_opt)} bits  (log2(N/K))",
    ]
    rows = [{"n": n, "k": k, "m": m, "query_count": len(rqs),
             "mean_baseline": mean_base.value, "lambda": lam,
             "bor_max_mean_of_logs": report.bor_max_mean_of_logs,
             "bor_max_log_of_mean": report.bor_max_log_of_mean, "bor_opt": report.bor_opt}]
    _emit(fmt, "ceiling", {"n": n, "rq": list(rq_values), "k": k, "m": m},
          payload, warnings, table, rows)


def _report_payload(report) -> dict:
    return dataclasses.asdict(report)


def _report_table(report, delta=None) -> list[str]:
    ci = ""
    if report.ci is not None:
        ci = f"  ci95 [{_bits(report.ci.low)}, {_bits(report.ci.high)}]"
    bor_text = _bits(report.bor.bits) if report.bor.defined else "undefined"
    lines = [
        f"K={report.k:<6} p_obs={report.p_obs:.4f}  baseline={report.mean_baseline.value:.5f}  "
        f"BoR={bor_text} bits{ci}  ceiling={_bits(report.ceilings.bor_max_mean_of_logs)}  "
        f"bor_opt={_bits(report.ceilings.bor_opt)}"
    ]
    if delta is not None and delta.defined:
        lines.append(
            f"        depth change {delta.k1}->{delta.k2}: {_bits(delta.total)} bits "
            f"(gain {_bits(delta.gain_term)}, baseline cost {_bits(delta.baseline_term)}, "
            f"plateau prediction {_bits(delta.predicted_plateau)})"
        )
    return lines


def _report_csv_row(report) -> dict:
    return {
        "k": report.k, "rule": report.rule.kind, "m": report.rule.m,
        "query_count": report.query_count, "excluded_zero_r": report.excluded_zero_r,
        "p_obs": report.p_obs, "mean_baseline": report.mean_baseline.value,
        "bor_bits": report.bor.bits, "bor_defined": report.bor.defined,
        "ceiling_mean_of_logs": report.ceilings.bor_max_mean_of_logs,
        "ceiling_log_of_mean": report.ceilings.bor_max_log_of_mean,
        "bor_opt": report.ceilings.bor_opt,
        "ci_low": report.ci.low if report.ci else "",
        "ci_high": report.ci.high if report.ci else "",
    }


@main.command("eval")
@click.option("--qrels", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--run", "run_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--n", type=int, required=True, help="Corpus size.")
@click.option("--k", "k_values", type=int, multiple=True, required=True,
              help="Retrieval depth; repeatable for a sweep.")
@click.option("--rule", type=click.Choice(["coverage", "recall"]), default="coverage",
              show_default=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--threshold", type=int, default=1, show_default=True,
              help="Minimum grade counted as relevant.")
@click.option("--bootstrap", type=int, default=5000, show_default=True,
              help="Bootstrap replicates for the CI; 0 disables.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--smooth", is_flag=True, help="Report a floor BoR when no query succeeds.")
@click.option("--p-obs", "p_obs", type=float, default=None,
              help="Skip files; evaluate a published aggregate success/recall directly.")
@click.option("--rq", "rq_values", multiple=True,
              help="Per-query relevant counts for the --p-obs coverage path.")
@click.option("--format", "fmt", type=_FORMATS, default="table", show_default=True)
def cmd_eval(qrels, run_path, n, k_values, rule, m, threshold, bootstrap, seed, smooth,
             p_obs, rq_values, fmt) -> None:
    """BoR of a run (or a published aggregate) at one or more depths."""
    ks = list(k_values)
    if sorted(ks) != ks or len(set(ks)) != len(ks):
        raise click.UsageError("depths must be strictly increasing")
    try:
        success_rule = SuccessRule(rule, m)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    params = {"qrels": qrels, "run": run_path, "n": n, "k": ks, "rule": rule, "m": m,
              "threshold": threshold, "bootstrap": bootstrap, "seed": seed,
              "smooth": smooth, "p_obs": p_obs, "rq": list(rq_values)}

    if p_obs is not None:
        _eval_aggregate(n, ks, success_rule, p_obs, rq_values, fmt, params)
        return
    if qrels is None or run_path is None:
        raise click.UsageError("provide --qrels and --run, or --p-obs for the aggregate path")

    try:
        judgments = parse_qrels(qrels, threshold)
        run = parse_run(run_path)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)

    warnings: list[str] = []
    if judgments.duplicate_count:
        warnings.append(f"{judgments.duplicate_count} duplicate judgments merged (max grade kept)")
    if run.rank_warnings:
        warnings.append(f"{run.rank_warnings} queries had rank fields inconsistent with scores")
    if judgments.decode_warnings or run.decode_warnings:
        warnings.append(
            f"{judgments.decode_warnings + run.decode_warnings} undecodable characters replaced")

    try:
        results = depth_sweep(run, judgments, n, ks, success_rule,
                              bootstrap_replicates=bootstrap or None,
                              seed=seed, smooth=smooth)
    except NoEvaluableQueriesError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NO_QUERIES)
    except ValueError as exc:
        raise click.UsageError(str(exc))

    if results and results[0][0].excluded_zero_r:
        warnings.append(f"{results[0][0].excluded_zero_r} zero-R queries excluded from aggregates")

    payload = [{"report": _report_payload(r), "delta": dataclasses.asdict(d) if d else None}
               for r, d in results]
    table: list[str] = []
    for report, delta in results:
        table.extend(_report_table(report, delta))
    rows = [_report_csv_row(r) for r, _ in results]
    _emit(fmt, "eval", params, payload, warnings, table, rows)


def _eval_aggregate(n, ks, success_rule, p_obs, rq_values, fmt, params) -> None:
    if not 0.0 <= p_obs <= 1.0:
        raise click.UsageError(f"--p-obs out of range: {p_obs}")
    payload = []
    table = []
    rows = []
    for k in ks:
        try:
            if success_rule.kind == "recall":
                value = bor_recall(p_obs, n, k)
                baseline = k / n
                ceiling = None
            else:
                rqs = [r for r in _read_rq_values(rq_values) if r > 0]
                if not rqs:
                    click.echo("error: every query has zero relevant documents", err=True)
                    sys.exit(EXIT_NO_QUERIES)
                baselines = [p_rand_at_least_m(BaselineParams(n, r, k, success_rule.m))
                             for r in rqs]
                mean_base = mean_probability(baselines)
                value = bor(p_obs, mean_base)
                baseline = mean_base.value
                ceiling = ceilings(baselines, n, k)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        entry = {"k": k, "p_obs": p_obs, "baseline": baseline,
                 "bor": dataclasses.asdict(value),
                 "ceilings": dataclasses.asdict(ceiling) if ceiling else None}
        payload.append(entry)
        bor_text = _bits(value.bits) if value.defined else "undefined"
        table.append(f"K={k:<6} p_obs={p_obs:.4f}  baseline={baseline:.3e}  BoR={bor_text} bits")
        rows.append({"k": k, "p_obs": p_obs, "baseline": baseline,
                     "bor_bits": value.bits, "bor_defined": value.defined})
    _emit(fmt, "eval", params, payload, [], table, rows)


@main.command("advise")
@click.option("--n", type=int, default=None, help="Corpus or tool-catalog size.")
@click.option("--rq", type=float, default=None, help="Mean relevant items per query.")
@click.option("--k", "k_values", type=int, multiple=True,
              help="Diagnose these depths instead of recommending one; repeatable.")
@click.option("--min-bits", type=float, default=0.1, show_default=True,
              help="Smallest ceiling still considered meaningful.")
@click.option("--scenarios", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON list of {name, n, rq, k} scenarios to diagnose in bulk.")
@click.option("--format", "fmt", type=_FORMATS, default="table", show_default=True)
def cmd_advise(n, rq, k_values, min_bits, scenarios, fmt) -> None:
    """Collapse diagnostics and depth recommendations."""
    params = {"n": n, "rq": rq, "k": list(k_values), "min_bits": min_bits,
              "scenarios": scenarios}
    if scenarios is not None:
        try:
            raw = json.loads(Path(scenarios).read_text())
            items = [advisor.CatalogScenario(str(s["name"]), int(s["n"]),
                                             float(s["rq"]), int(s["k"])) for s in raw]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            click.echo(f"error: bad scenarios file: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        results = advisor.catalog_report(items)
        payload = [dataclasses.asdict(r) for r in results]
        table = []
        rows = []
        for r in results:
            if r.diagnostic is None:
                table.append(f"{r.name:<24} error: {r.error}")
                continue
            d = r.diagnostic
            table.append(f"{r.name:<24} N={d.n:<8} R={d.mean_relevant:<6g} K={d.k:<5} "
                         f"lambda={d.lam:<7.3g} ceiling={_bits(d.exact_ceiling_bits)} bits  {d.zone}")
            rows.append(dataclasses.asdict(d) | {"name": r.name})
        _emit(fmt, "advise", params, payload, [], table, rows)
        return

    if n is None or rq is None:
        raise click.UsageError("provide --n and --rq (or --scenarios FILE)")
    try:
        if k_values:
            diags = [advisor.diagnose(n, rq, k) for k in k_values]
            payload = [dataclasses.asdict(d) for d in diags]
            table = [
                f"K={d.k:<6} lambda={d.lam:<9.4g} exact={_bits(d.exact_ceiling_bits)} bits  "
                f"poisson={_bits(d.poisson_ceiling_bits)} bits  {d.zone}"
                for d in diags
            ]
            rows = [dataclasses.asdict(d) for d in diags]
        else:
            rec = advisor.recommend_k(n, rq, min_bits)
            payload = dataclasses.asdict(rec)
            if rec.saturated:
                table = [f"no usable depth: even K=1 offers under {min_bits} bits"]
            else:
                table = [f"recommended K    {rec.k}",
                         f"ceiling at K     {_bits(rec.diagnostic.exact_ceiling_bits)} bits",
                         f"lambda at K      {rec.diagnostic.lam:.4g}",
                         f"zone at K        {rec.diagnostic.zone}"]
            rows = [dataclasses.asdict(rec.diagnostic) | {"recommended_k": rec.k,
                                                          "saturated": rec.saturated}]
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(fmt, "advise", params, payload, [], table, rows)


@main.command("simulate")
@click.option("--n", type=int, required=True)
@click.option("--rq", type=int, required=True, help="Relevant items per query.")
@click.option("--k", type=int, required=True)
@click.option("--m", type=int, default=1, show_default=True)
@click.option("--trials", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--format", "fmt", type=_FORMATS, default="table", show_default=True)
def cmd_simulate(n, rq, k, m, trials, seed, fmt) -> None:
    """Monte Carlo check of the closed-form random baseline."""
    try:
        params = BaselineParams(n, rq, k, m)
        exact = p_rand_at_least_m(params)
        empirical, se = monte_carlo_p(TrialConfig(params, trials, seed))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    z = (empirical - exact.value) / se if se > 0 else 0.0
    payload = {"n": n, "rq": rq, "k": k, "m": m, "trials": trials, "seed": seed,
               "empirical": empirical, "exact": exact.value, "se": se, "z": z}
    table = [
        f"exact      {exact.value:.6f}",
        f"empirical  {empirical:.6f}",
        f"std error  {se:.6f}",
        f"z          {z:+.3f}",
    ]
    _emit(fmt, "simulate", {k: v for k, v in payload.items() if k not in
                            ("empirical", "exact", "se", "z")},
          payload, [], table, [payload])


@main.command("index")
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--index", "index_path", type=click.Path(dir_okay=False), required=True)
@click.option("--stopwords", type=click.Path(exists=True, dir_okay=False), default=None)
def cmd_index(corpus, index_path, stopwords) -> None:
    """Build a BM25 index snapshot from a labeled corpus."""
    try:
        docs = parse_corpus(corpus)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    stop = None
    if stopwords:
        stop = frozenset(w.strip().lower() for w in Path(stopwords).read_text().splitlines()
                         if w.strip())
    try:
        index = bm25.build_index(docs, stop)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    bm25.save_index(index, index_path)
    click.echo(f"indexed {index.doc_count} documents, {len(index.postings)} terms "
               f"-> {index_path}")


def _load_queries(queries_path, corpus) -> list[tuple[str, str]]:
    if queries_path is not None:
        out = []
        reader_lines = Path(queries_path).read_text(encoding="utf-8", errors="replace")
        for lineno, line in enumerate(reader_lines.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected 'qid<TAB>query text'")
            out.append((parts[0].strip(), parts[1]))
        if not out:
            raise ParseError("no queries found")
        return out
    if corpus is None:
        raise click.UsageError("--queries FILE is required unless --corpus supplies documents")
    return [(doc.doc_id, extract_subject(doc.text)) for doc in corpus]


@main.command("search")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--queries", "queries_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="TSV of qid<TAB>query text; defaults to corpus subject lines.")
@click.option("--k", type=int, required=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True, help="Run file to write.")
@click.option("--exclude-self", is_flag=True,
              help="Remove each query's own document from its results.")
@click.option("--class-relevance", "emit_class_qrels", is_flag=True,
              help="Also write qrels where same-label documents are relevant.")
@click.option("--qrels-out", type=click.Path(dir_okay=False), default=None)
@click.option("--tag", default="bm25", show_default=True)
def cmd_search(corpus_path, index_path, queries_path, k, output, exclude_self,
               emit_class_qrels, qrels_out, tag) -> None:
    """Run BM25 over queries and write a standard run file."""
    if corpus_path is None and index_path is None:
        raise click.UsageError("provide --corpus or --index")
    if k < 1:
        raise click.UsageError(f"depth must be >= 1, got {k}")
    corpus = None
    try:
        if corpus_path is not None:
            corpus = parse_corpus(corpus_path)
        index = bm25.load_index(index_path) if index_path else bm25.build_index(corpus)
        queries = _load_queries(queries_path, corpus)
    except (ParseError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)

    try:
        run = bm25.make_run(index, queries, k, exclude_self=exclude_self, tag=tag)
    except KeyError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    write_run(run, output)
    click.echo(f"wrote {sum(len(v) for v in run.rankings.values())} result lines "
               f"for {len(run.rankings)} queries -> {output}")

    if emit_class_qrels:
        if corpus is None:
            raise click.UsageError("--class-relevance needs --corpus for labels")
        try:
            judgments = class_relevance(corpus, [qid for qid, _ in queries])
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PARSE)
        qrels_path = qrels_out or output + ".qrels"
        write_qrels(judgments, qrels_path)
        click.echo(f"wrote class-relevance qrels -> {qrels_path}")


if __name__ == "__main__":
    main()
