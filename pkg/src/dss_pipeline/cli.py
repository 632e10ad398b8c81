"""Command-line entry points for every pipeline stage."""
from __future__ import annotations

import json
from pathlib import Path

import click

from .config import load_cleaning_rules, load_ctgov_config
from .ctgov import CtgovClient, HarvestDestination
from .metrics import agreement, discrepancies, write_yearly_csv, yearly_counts
from .normalize import build_corpus
from .records import TrialRecord, corpus_record_from_clean
from .store import (
    CorpusStore,
    DatasetSplit,
    export_csv,
    import_csv,
    stratified_split,
)


@click.group()
def main():
    """Harvest, clean, split, annotate, train, and evaluate DSS corpora."""


@main.command()
@click.option("--max-records", type=int, default=None, help="Stop after fetching this many documents.")
@click.option("--resume", is_flag=True, help="Continue from the persisted cursor and existing output.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Corpus CSV to write.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def harvest(max_records, resume, out_path, config_path):
    """Fetch DSS-bearing study records from the registry API."""
    client = CtgovClient(load_ctgov_config(config_path))
    destination = HarvestDestination(out_path, resume=resume)
    summary = client.harvest(destination, max_records=max_records)
    click.echo(json.dumps(summary.as_dict()))


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rules", "rules_path", type=click.Path(exists=True), default=None)
def clean(in_path, out_path, rules_path):
    """Clean and deduplicate a harvested corpus."""
    rules = load_cleaning_rules(rules_path)
    records = import_csv(in_path)
    raw = [
        TrialRecord(r.nct_id, r.original_category, r.dss_text, r.first_posted_year)
        for r in records
    ]
    manual = {r.nct_id: r.manual_label for r in records}
    cleaned, stats = build_corpus(raw, rules)
    out_records = [
        corpus_record_from_clean(c).with_manual_label(manual.get(c.nct_id))
        for c in cleaned
    ]
    export_csv(out_records, out_path)
    click.echo(json.dumps(stats.as_dict()))


@main.command()
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def split(seed, in_path, out_path):
    """Write the stratified train/validation/test column for labeled records."""
    records = import_csv(in_path)
    labeled = [r for r in records if r.manual_label is not None]
    if not labeled:
        raise click.ClickException("no labeled records to split")
    partition = stratified_split(labeled, seed=seed)
    split_of = {r.nct_id: partition.segment_of(r.nct_id) for r in labeled}
    out_records = [r.with_split(split_of.get(r.nct_id)) for r in records]
    export_csv(out_records, out_path)
    sizes = partition.sizes()
    click.echo(
        json.dumps({"seed": seed, "train": sizes[0], "validation": sizes[1], "test": sizes[2]})
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--split-seed", type=int, default=None, help="Seed used when the split column was written.")
def train(config_path, corpus_path, out_path, split_seed):
    """Train a classifier on the corpus's split column."""
    from . import classify  # deferred: pulls in the ML stack

    config = classify.ClassifierConfig.from_file(config_path)
    records = import_csv(corpus_path)
    with_split = [r for r in records if r.split]
    if not with_split:
        raise click.ClickException(
            "corpus has no split column; run `dss split` first"
        )
    partition = DatasetSplit.from_records(with_split, seed=split_seed if split_seed is not None else -1)
    artifact = classify.train(config, with_split, partition)
    classify.save_artifact(artifact, out_path)
    click.echo(
        json.dumps(
            {
                "backend": artifact.config.backend,
                "epochs": len(artifact.training_log),
                "best_epoch": artifact.best_epoch,
                "best_validation_accuracy": artifact.training_log[artifact.best_epoch - 1].validation_accuracy,
            }
        )
    )


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def predict(model_path, in_path, out_path):
    """Append predicted_label and score columns to a corpus CSV."""
    import csv as csv_module

    from . import classify

    artifact = classify.load_artifact(model_path)
    records = import_csv(in_path)
    predictions = classify.predict_batch(artifact, [r.dss_text for r in records])
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv_module.writer(handle)
        writer.writerow(
            ["nct_id", "dss_text", "predicted_label", "score_yes", "score_no", "score_undecided"]
        )
        for record, prediction in zip(records, predictions):
            writer.writerow(
                [
                    record.nct_id,
                    record.dss_text,
                    prediction.label.value,
                    f"{prediction.scores[0]:.6f}",
                    f"{prediction.scores[1]:.6f}",
                    f"{prediction.scores[2]:.6f}",
                ]
            )
    click.echo(json.dumps({"predicted": len(predictions)}))


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--target", type=click.Choice(["original", "manual"]), required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--segment", type=click.Choice(["train", "validation", "test"]), default="test", show_default=True)
@click.option("--averaging", type=click.Choice(["macro", "weighted"]), default="macro", show_default=True)
def evaluate(model_path, corpus_path, target, out_path, segment, averaging):
    """Score a split segment and write the evaluation report."""
    from . import classify

    artifact = classify.load_artifact(model_path)
    records = import_csv(corpus_path)
    target_column = "original_category" if target == "original" else "manual_label"
    report = classify.evaluate_split(
        artifact, records, segment=segment, target=target_column, averaging=averaging
    )
    report.write(out_path)
    click.echo(report.format_table())


@main.group()
def report():
    """Corpus-level reports that need no trained model."""


@report.command("agreement")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
def report_agreement(corpus_path):
    records = [r for r in import_csv(corpus_path) if r.manual_label is not None]
    if not records:
        raise click.ClickException("no annotated records in corpus")
    result = agreement(records)
    click.echo(json.dumps(result.as_dict()))


@report.command("discrepancies")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
def report_discrepancies(corpus_path):
    records = [r for r in import_csv(corpus_path) if r.manual_label is not None]
    for item in discrepancies(records):
        click.echo(
            json.dumps(
                {
                    "nct_id": item.nct_id,
                    "original_category": item.original_category.value,
                    "manual_label": item.manual_label.value,
                    "dss_text": item.dss_text,
                }
            )
        )


@report.command("yearly")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def report_yearly(corpus_path, out_path):
    series = yearly_counts(import_csv(corpus_path))
    write_yearly_csv(series, out_path)
    click.echo(json.dumps({"years": len(series), "records": sum(c for _, c in series)}))


@main.command("annotate-serve")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--lease-minutes", type=float, default=10.0, show_default=True)
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="sqlite file for committed labels [default: <corpus>.db]")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="static UI assets [default: ./frontend/dist if present]")
def annotate_serve(corpus_path, port, host, lease_minutes, store_path, ui_dir):
    """Serve the annotation API (and UI) over HTTP.

    Labels are committed to the sqlite store next to the corpus, so a
    restarted server resumes where annotators left off; /api/export merges
    them back into the CSV schema.
    """
    import uvicorn

    from .service import create_app

    store_file = Path(store_path) if store_path else Path(str(corpus_path) + ".db")
    store = CorpusStore(store_file)
    if store.total_count() == 0:
        count = store.import_csv(corpus_path)
        click.echo(f"loaded {count} records from {corpus_path}", err=True)
    else:
        click.echo(f"reusing existing store {store_file}", err=True)

    if ui_dir is None:
        candidate = Path("frontend/dist")
        ui_dir = candidate if candidate.is_dir() else None
    app = create_app(store, lease_minutes=lease_minutes, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
