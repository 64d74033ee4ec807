"""Command-line entry point.

Exit codes: 0 success, 1 domain failure (bad data, failed constraint,
unknown coin), 2 usage or I/O failure (click reports those itself).
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import corpus, evaluation, learners, report
from .featurex import default_lexicon, load_lexicon
from .market import MarketClient, MarketError, UnknownCoinError
from .pipeline import UndecodableContentError, classify_query
from .rulestore import RuleStore, RuleStoreError, add_account
from .service import ConfigError, ServiceConfig, run_service

_KIND_CHOICES = click.Choice(["nb", "lr", "svm"])


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Sharia-compliance screening for cryptocurrencies."""


@main.command("validate-dataset")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def validate_dataset(path: str) -> None:
    """Check a dataset CSV against the structural constraints C1-C4."""
    try:
        dataset = corpus.load_dataset(path)
    except corpus.DatasetFormatError as exc:
        _fail(str(exc))
    rep = corpus.validate_constraints(dataset)
    click.echo(f"Records: {len(dataset)} ({dataset.n_halal} Halal, {dataset.n_haram} Haram)")
    for result in rep.results:
        status = "PASS" if result.passed else "FAIL"
        note = " (informational)" if result.informational else ""
        click.echo(f"{result.constraint_id} {status}{note}: {result.description}")
        if result.offenders:
            click.echo(f"  offenders: {', '.join(result.offenders)}")
    if not rep.required_passed:
        sys.exit(1)


@main.command()
@click.option("--model", "kind", type=_KIND_CHOICES, required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--alpha", type=float, default=1.0, show_default=True, help="NB smoothing")
@click.option("--ridge", type=float, default=1e-8, show_default=True, help="LR ridge lambda")
@click.option("--cost", type=float, default=1.0, show_default=True, help="SVM C")
def train(kind: str, data: str, out: str, alpha: float, ridge: float, cost: float) -> None:
    """Train a classifier on a dataset CSV and save the model file."""
    try:
        dataset = corpus.load_dataset(data)
        if kind == "nb":
            model = learners.train_nb(dataset, alpha=alpha)
        elif kind == "lr":
            model = learners.train_lr(dataset, lam=ridge)
        else:
            model = learners.train_svm(dataset, C=cost)
    except (corpus.DatasetFormatError, learners.TrainingError) as exc:
        _fail(str(exc))
    learners.save_model(model, out)
    click.echo(f"Model: {model.kind}")
    click.echo(f"Dataset hash: {model.dataset_hash}")
    hp = " ".join(f"{k}={v}" for k, v in sorted(model.hyperparams.items()))
    click.echo(f"Hyperparameters: {hp}")
    if not model.converged:
        click.echo("Note: optimizer hit the iteration limit before convergence")
    click.echo(f"Saved to {out}")


@main.command()
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--folds", type=click.IntRange(min=2), default=10, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option(
    "--model",
    "kind",
    type=click.Choice(["nb", "lr", "svm", "all"]),
    default="all",
    show_default=True,
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["text", "machine"]),
    default="text",
    show_default=True,
)
@click.option(
    "--report-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="also write JSON reports, metrics.csv, and figures here",
)
def evaluate(data: str, folds: int, seed: int, kind: str, fmt: str, report_dir) -> None:
    """Cross-validate one or all classifiers and print the comparison."""
    try:
        dataset = corpus.load_dataset(data)
    except corpus.DatasetFormatError as exc:
        _fail(str(exc))
    kinds = ["nb", "lr", "svm"] if kind == "all" else [kind]
    try:
        reports = [
            evaluation.cross_validate(dataset, k, k=folds, seed=seed) for k in kinds
        ]
    except (evaluation.EvaluationError, learners.TrainingError) as exc:
        _fail(str(exc))

    if fmt == "machine":
        for r in reports:
            click.echo(report.report_to_json(r), nl=False)
    elif len(reports) == 1:
        click.echo(report.render_text_report(reports[0]), nl=False)
    else:
        click.echo(evaluation.compare_report(reports).text, nl=False)

    if report_dir:
        written = report.write_report_directory(reports, report_dir)
        for p in written:
            click.echo(f"wrote {p}", err=True)


_PRIORITY_TAGS = {"High": "[High]   ", "Low": "[Low]    ", "Neutral": "[Neutral]"}


def _render_card(result) -> str:
    lines = [result.verdict_text]
    lines.append(f"Ticker: {result.ticker} ({result.name})")
    lines.append(f"Provenance: {result.provenance}")
    if result.confidence is not None:
        lines.append(f"Confidence: {result.confidence:.6f}")
    if result.revision is not None:
        lines.append(f"Store revision: {result.revision}")
    lines.append(f"High-priority majority: {'yes' if result.high_priority_majority else 'no'}")
    lines.append(f"Low evidence: {'yes' if result.low_evidence else 'no'}")
    if result.explanation.triggered:
        lines.append("Triggered features:")
        for t in result.explanation.triggered:
            evidence = ", ".join(
                f"{' '.join(m.pattern)} x{m.count}" for m in t.evidence
            )
            suffix = f" ({evidence})" if evidence else ""
            lines.append(
                f"  {_PRIORITY_TAGS[t.priority.value]} {t.feature.value}: "
                f"{t.description}{suffix}"
            )
    else:
        lines.append("Triggered features: none")
    return "\n".join(lines)


@main.command()
@click.argument("query")
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--offline", is_flag=True, help="serve from recorded fixtures, no network")
@click.option("--fixtures", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--api-base", default=None, help="metadata endpoint base URL")
@click.option("--store", "store_path", type=click.Path(dir_okay=False), default=None)
@click.option("--lexicon", "lexicon_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--min-count", type=click.IntRange(min=1), default=1, show_default=True)
def classify(query, model_path, offline, fixtures, api_base, store_path, lexicon_path, min_count):
    """Classify one coin and print the ruling card."""
    if offline and not fixtures:
        raise click.UsageError("--offline requires --fixtures")
    try:
        model = learners.load_model(model_path)
    except learners.ModelFormatError as exc:
        _fail(str(exc))
    lexicon = load_lexicon(lexicon_path) if lexicon_path else default_lexicon()
    if offline:
        client = MarketClient(mode="fixture", fixture_dir=fixtures)
    else:
        kwargs = {"api_base": api_base} if api_base else {}
        client = MarketClient(mode="live", **kwargs)
    store = RuleStore(store_path) if store_path else None
    try:
        result = classify_query(
            query,
            model=model,
            market_client=client,
            store=store,
            lexicon=lexicon,
            min_count=min_count,
        )
    except UnknownCoinError as exc:
        _fail(f"unknown coin: {exc}")
    except (MarketError, UndecodableContentError) as exc:
        _fail(str(exc))
    finally:
        if store is not None:
            store.close()
    click.echo(_render_card(result))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
def serve(config_path: str) -> None:
    """Run the HTTP API until interrupted."""
    try:
        config = ServiceConfig.from_file(config_path)
    except ConfigError as exc:
        raise click.UsageError(str(exc))
    try:
        run_service(config)
    except KeyboardInterrupt:
        pass


@main.command()
@click.option("--halal", type=click.IntRange(min=1), default=56, show_default=True)
@click.option("--haram", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def synthesize(halal: int, haram: int, seed: int, out: str) -> None:
    """Generate a constraint-satisfying fixture dataset CSV."""
    try:
        dataset = corpus.synthesize_fixture(halal, haram, seed)
    except corpus.SynthesisError as exc:
        _fail(str(exc))
    corpus.save_dataset(dataset, out)
    click.echo(f"Wrote {len(dataset)} records to {out}")
    click.echo(f"Dataset hash: {corpus.dataset_hash(dataset)}")


@main.command("add-scholar")
@click.option("--accounts", type=click.Path(dir_okay=False), required=True)
@click.option("--id", "scholar_id", required=True)
@click.option("--display-name", default="")
@click.option("--password", prompt=True, hide_input=True, confirmation_prompt=True)
def add_scholar(accounts: str, scholar_id: str, display_name: str, password: str) -> None:
    """Create or replace a scholar account in the accounts file."""
    try:
        acct = add_account(accounts, scholar_id, display_name, password)
    except RuleStoreError as exc:
        _fail(str(exc))
    click.echo(f"Account {acct.id!r} saved to {accounts}")


if __name__ == "__main__":
    main()
