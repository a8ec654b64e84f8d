"""`glyphrank-export` command line interface."""

from __future__ import annotations

import sys

import click

from .errors import ExportError
from .export import export_index, export_queries


@click.group()
def cli() -> None:
    """Export dual-encoder checkpoints to GLIX/GLQY files."""


@cli.command("index")
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dict", "ids_dict", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--batch-size", default=64, show_default=True, type=click.IntRange(min=1))
def index_cmd(checkpoint: str, ids_dict: str, out: str, batch_size: int) -> None:
    """Export the candidate dictionary to a GLIX index."""
    manifest = export_index(checkpoint, ids_dict, out)
    click.echo(manifest.to_json())


@cli.command("queries")
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--images", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False, writable=True))
@click.option("--batch-size", default=64, show_default=True, type=click.IntRange(min=1))
def queries_cmd(checkpoint: str, images: str, out: str, batch_size: int) -> None:
    """Export query images to a GLQY file."""
    manifest = export_queries(checkpoint, images, out)
    click.echo(manifest.to_json())


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


def entry() -> None:
    raise SystemExit(main())
