"""Command-line front end.

Exit statuses: 0 certified rigid, 1 inconclusive or inapplicable, 2 input error.
"""
from __future__ import annotations

import difflib
import json
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import click

from . import __version__, corpus
from .certify import (
    DEFAULT_EQUIVALENCE_THRESHOLD,
    DEFAULT_FD_STEP,
    DEFAULT_MARGIN,
    NotSquare,
    Settings,
    TransverseInapplicable,
    Verdict,
    equivalence_report,
    full_certification,
    prestress_test,
    transverse_test,
)
from .core import dof_profile
from .fileformat import (
    FileFormatError,
    FrameworkFile,
    dump_document,
    format_report,
    parse_document,
    report_document,
)
from .matrixlab import select_pin_set

EXIT_RIGID, EXIT_UNDECIDED, EXIT_INPUT = 0, 1, 2

EXIT_STATUS = {v: EXIT_RIGID if v.rigid else EXIT_UNDECIDED for v in Verdict}


def exit_status(verdict: Verdict) -> int:
    return EXIT_STATUS[verdict]


def load_framework_file(path: str) -> FrameworkFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text)


def _analyze_one(path: str, settings: Settings):
    """Return (status, text, document) for one file."""
    try:
        ff = load_framework_file(path)
        f = ff.to_framework()
        pin = ff.pin_set(f)
    except FileFormatError as exc:
        return EXIT_INPUT, f"{path}: input error: {exc}", {"source": path, "error": str(exc)}
    if not f.name:
        f = replace(f, name=Path(path).stem)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # disagreements are reported in notes
        report = full_certification(f, settings, pin)
    elapsed = time.perf_counter() - start
    doc = report_document(report, __version__, {"certification": elapsed}, source=path)
    return exit_status(report.verdict), format_report(report), doc


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="rigcert")
def main():
    """Certify rigidity of bar-and-joint frameworks at singular configurations."""


@main.command()
@click.argument("files", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--rank-rtol", type=float, default=None,
              help="Rank tolerance relative to the largest singular value "
                   "[default: max(rows, cols) * machine epsilon].")
@click.option("--margin", type=float, default=DEFAULT_MARGIN, show_default=True,
              help="Relative margin a test value must exceed to count as nonzero.")
@click.option("--fd-step", type=float, default=DEFAULT_FD_STEP, show_default=True,
              help="Finite-difference step for the gradient check, relative to the configuration scale.")
@click.option("--threshold", type=float, default=DEFAULT_EQUIVALENCE_THRESHOLD, show_default=True,
              help="Equivalence residual threshold.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None,
              help="Write the structured (JSON) report to this path.")
@click.option("--json", "as_json", is_flag=True, help="Print the structured report instead of text.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Analyze several files concurrently.")
def analyze(files, rank_rtol, margin, fd_step, threshold, report_path, as_json, jobs):
    """Run the full certification on one or more framework files.

    Exit status 0 when every file is certified rigid, 1 when some result is
    inconclusive or inapplicable, 2 on any input error.
    """
    settings = Settings(rank_rtol=rank_rtol, margin=margin, fd_step=fd_step, equivalence_threshold=threshold)
    if jobs > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: _analyze_one(p, settings), files))
    else:
        results = [_analyze_one(p, settings) for p in files]
    docs = [doc for _, _, doc in results]
    payload = docs[0] if len(docs) == 1 else docs
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo("\n\n".join(text for _, text, _ in results))
    if report_path:
        Path(report_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    sys.exit(max(status for status, _, _ in results))


@main.command("corpus")
@click.argument("name")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
              help="Write the framework file here instead of standard output.")
def corpus_cmd(name, output):
    """Emit a canonical framework file, or `list` the available names."""
    if name == "list":
        for e in corpus.canonical_entries():
            click.echo(f"{e.name:20s} {e.description}")
        return
    try:
        e = corpus.entry(name)
    except KeyError:
        close = difflib.get_close_matches(name, corpus.names(), n=1, cutoff=0.0)
        hint = f"; did you mean '{close[0]}'?" if close else ""
        click.echo(f"unknown corpus entry '{name}'{hint}", err=True)
        sys.exit(EXIT_INPUT)
    text = dump_document(FrameworkFile.from_entry(e))
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command("check-equivalence")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--threshold", type=float, default=DEFAULT_EQUIVALENCE_THRESHOLD, show_default=True,
              help="Pass when the normalized residual is at most this.")
@click.option("--rank-rtol", type=float, default=None, help="Rank tolerance relative to the largest singular value.")
@click.option("--margin", type=float, default=DEFAULT_MARGIN, show_default=True)
def check_equivalence(file, threshold, rank_rtol, margin):
    """Compare the determinant gradient with omega^T R(p') on a single-flex isostatic framework."""
    try:
        ff = load_framework_file(file)
        f = ff.to_framework()
        pin = ff.pin_set(f) or select_pin_set(f)
    except FileFormatError as exc:
        click.echo(f"{file}: input error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    settings = Settings(rank_rtol=rank_rtol, margin=margin, equivalence_threshold=threshold)
    profile = dof_profile(f)
    try:
        eq = equivalence_report(f, pin, rank_rtol)
    except NotSquare:
        click.echo(f"{profile.label}: pinned rigidity matrix is not square; equivalence check needs an isostatic framework")
        sys.exit(EXIT_UNDECIDED)
    except TransverseInapplicable as exc:
        click.echo(str(exc))
        sys.exit(EXIT_UNDECIDED)
    pre = prestress_test(f, settings, pin)
    tr = transverse_test(f, settings, pin)
    ok = eq.passed(threshold)
    click.echo(f"alpha: {eq.alpha:+.12e}")
    click.echo(f"residual: {eq.residual:.3e} (threshold {threshold:g})")
    click.echo(f"stress energy: {pre.energy:+.12e}")
    click.echo(f"transverse value: {tr.value:+.12e}")
    click.echo(f"alpha * stress energy: {eq.alpha * pre.energy:+.12e}")
    if eq.degenerate:
        click.echo("both vectors vanish: proportional trivially")
    click.echo("equivalence: " + ("pass" if ok else "FAIL"))
    sys.exit(EXIT_RIGID if ok else EXIT_UNDECIDED)


if __name__ == "__main__":
    main()
