"""Command-line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error. The
``GLYPHRANK_THREADS`` environment variable caps the parallel throughput mode
of ``sweep-k``.
"""

from __future__ import annotations

import csv
import json
import os
import sys
from pathlib import Path

import click

from . import evaluation, losses, storage, synth
from .errors import GlyphRankError
from .ids import load_ids_dictionary, parse_ids, validate_ids
from .inference import DEFAULT_K, DEFAULT_TAU, InferenceConfig, infer
from .model import CandidateIndex, make_candidate

THREADS_ENV = "GLYPHRANK_THREADS"


@click.group()
def cli() -> None:
    """Retrieval and hierarchical-inference engine for ideographic characters."""


@cli.command("parse-ids")
@click.argument("source")
def parse_ids_cmd(source: str) -> None:
    """Parse one IDS string, or every line of a file if SOURCE is a path."""
    if Path(source).is_file():
        texts = [
            line.strip()
            for line in Path(source).read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.lstrip().startswith("#")
        ]
    else:
        texts = [source]
    for text in texts:
        seq = parse_ids(text)
        report = validate_ids(seq)
        click.echo(
            json.dumps(
                {
                    "text": seq.text,
                    "tokens": [
                        {"char": t.char, "kind": t.kind.value, "arity": t.arity}
                        for t in seq.tokens
                    ],
                    "mask": list(seq.mask),
                    "well_formed": report.ok,
                    "error_position": report.position,
                    "error_reason": report.reason,
                },
                ensure_ascii=False,
            )
        )


@cli.command("build-index")
@click.option("--dict", "dict_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def build_index_cmd(dict_path: str, embeddings: str, out: str) -> None:
    """Combine an IDS dictionary (TSV) with embeddings (JSONL) into a GLIX index."""
    dictionary = load_ids_dictionary(dict_path)
    candidates = []
    with open(embeddings, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            label = record["label"]
            ids_text = record.get("ids") or dictionary.get(label)
            if ids_text is None:
                raise GlyphRankError(
                    f"{embeddings}:{lineno}: no IDS entry for character {label!r}"
                )
            candidates.append(
                make_candidate(label, parse_ids(ids_text), record["global"], record["local"])
            )
    index = CandidateIndex(candidates)
    storage.save_index(index, out)
    click.echo(json.dumps({"candidates": len(index), "dim": index.dim, "out": out}))


@cli.command("synth")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--radicals", type=int, required=True)
@click.option("--candidates", type=int, required=True)
@click.option("--dim", type=int, required=True)
@click.option("--patches", type=int, required=True)
@click.option("--noise", type=float, default=0.0, show_default=True)
@click.option("--queries", "n_queries", type=int, default=None, help="Defaults to --candidates.")
@click.option("--out-index", required=True, type=click.Path(dir_okay=False))
@click.option("--out-queries", required=True, type=click.Path(dir_okay=False))
def synth_cmd(seed, radicals, candidates, dim, patches, noise, n_queries, out_index, out_queries):
    """Generate a deterministic synthetic index and query set."""
    index, queries = synth.synth_generate(
        seed, radicals, candidates, dim, patches, noise, n_queries=n_queries
    )
    storage.save_index(index, out_index)
    storage.save_queries(queries, out_queries)
    click.echo(
        json.dumps(
            {"candidates": len(index), "queries": len(queries), "dim": index.dim}
        )
    )


@cli.command("query")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--queries", "queries_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--tau-g", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--tau-l", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def query_cmd(index_path, queries_path, k, tau_g, tau_l, out) -> None:
    """Rank every query against the index and write a CSV of scores."""
    index = storage.load_index(index_path)
    queries = storage.load_queries(queries_path)
    cfg = InferenceConfig(k=k, tau_g=tau_g, tau_l=tau_l)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["query_id", "rank", "label", "s_global", "s_local", "p_global", "p_local", "s_final"]
        )
        for q in queries:
            result = infer(q, index, cfg)
            for rank, entry in enumerate(result.entries, start=1):
                writer.writerow(
                    [
                        q.id,
                        rank,
                        entry.label,
                        f"{entry.s_global:.9g}",
                        "" if entry.s_local is None else f"{entry.s_local:.9g}",
                        "" if entry.p_global is None else f"{entry.p_global:.9g}",
                        "" if entry.p_local is None else f"{entry.p_local:.9g}",
                        "" if entry.s_final is None else f"{entry.s_final:.9g}",
                    ]
                )
    click.echo(json.dumps({"queries": len(queries), "k": min(k, len(index)), "out": out}))


@cli.command("evaluate")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--queries", "queries_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--tau-g", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--tau-l", type=float, default=DEFAULT_TAU, show_default=True)
def evaluate_cmd(index_path, queries_path, k, tau_g, tau_l) -> None:
    """Report Top-1 accuracy and Recall@K over a labelled query set."""
    index = storage.load_index(index_path)
    queries = storage.load_queries(queries_path)
    cfg = InferenceConfig(k=k, tau_g=tau_g, tau_l=tau_l)
    results = [infer(q, index, cfg) for q in queries]
    truths = [q.truth for q in queries]
    click.echo(
        json.dumps(
            {
                "queries": len(queries),
                "k": min(k, len(index)),
                "top1_accuracy": evaluation.top1_accuracy(results, truths),
                "recall_at_k": evaluation.recall_at_k(results, truths, k),
            }
        )
    )


@cli.command("sweep-k")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--queries", "queries_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k-list", required=True, help="Comma-separated K values; 'full' = all candidates.")
@click.option("--tau-g", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--tau-l", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--parallel", is_flag=True, help="Throughput mode on a thread pool.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def sweep_k_cmd(index_path, queries_path, k_list, tau_g, tau_l, parallel, out) -> None:
    """Run the accuracy/latency sweep over candidate sizes K."""
    index = storage.load_index(index_path)
    queries = storage.load_queries(queries_path)
    ks: list[int | str] = []
    for part in k_list.split(","):
        part = part.strip()
        ks.append(part if part.lower() == "full" else int(part))
    threads = None
    if parallel:
        threads = int(os.environ.get(THREADS_ENV, os.cpu_count() or 1))
    cfg = InferenceConfig(tau_g=tau_g, tau_l=tau_l)
    rows = evaluation.sweep_k(index, queries, ks, cfg, threads=threads)
    evaluation.write_sweep_csv(rows, out)
    click.echo(json.dumps({"rows": len(rows), "out": out}))


@cli.command("loss-eval")
@click.option("--batch", "batch_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tau-g", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--tau-l", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--epoch", type=int, default=0, show_default=True)
@click.option("--total-epochs", type=int, default=1, show_default=True)
@click.option("--warmup-epochs", type=int, default=None, help="Defaults to ceil(0.25 * total).")
@click.option("--alpha", type=float, default=0.8, show_default=True)
@click.option("--beta", type=float, default=1.0, show_default=True)
def loss_eval_cmd(batch_path, tau_g, tau_l, epoch, total_epochs, warmup_epochs, alpha, beta) -> None:
    """Evaluate the reference losses on a JSONL batch for parity testing."""
    batch = losses.load_batch_jsonl(batch_path)
    if warmup_epochs is None:
        sched = losses.CurriculumSchedule.from_warmup_fraction(total_epochs, alpha=alpha, beta=beta)
    else:
        sched = losses.CurriculumSchedule(total_epochs, warmup_epochs, alpha, beta)
    breakdown = losses.total_loss(batch, epoch, sched, tau_g, tau_l)
    click.echo(
        json.dumps(
            {
                "total": breakdown.total,
                "global_loss": breakdown.global_loss,
                "local_loss": breakdown.local_loss,
                "weight_global": breakdown.weight_global,
                "weight_local": breakdown.weight_local,
            }
        )
    )


def main(argv=None) -> int:
    """Run the CLI with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except GlyphRankError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 2
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
