"""CLI: export per-layer transformer hidden states to an EMBD dump."""

from __future__ import annotations

import logging

import click

from . import __version__
from .exporter import ExportRequest, export


@click.command()
@click.version_option(version=__version__, prog_name="export-embeddings")
@click.option("--model", required=True, help="Model identifier or local checkpoint path.")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Sentence TSV: id<TAB>lang<TAB>text.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--layers", type=str, default=None,
              help="Comma-separated 1-based encoder layers (default: all).")
def main(model, in_path, out_path, layers):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    layer_list = None
    if layers:
        try:
            layer_list = [int(x) for x in layers.split(",") if x.strip()]
        except ValueError as exc:
            raise click.BadParameter(f"bad --layers value {layers!r}") from exc
    req = ExportRequest(model=model, input_path=in_path, output_path=out_path, layers=layer_list)
    try:
        result = export(req)
    except (ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"wrote {result.n_sentences} sentences "
        f"(n_layers={result.n_layers}, dim={result.dim}, "
        f"truncated={len(result.truncated)}) to {out_path}"
    )


if __name__ == "__main__":
    main()
