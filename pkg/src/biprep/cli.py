"""Command-line entry point exposing every pipeline stage.

Each stage writes a JSON reproducibility manifest next to its primary output
(tool version, resolved config, master seed, input/output content digests,
wall-clock duration). Exit codes: 0 success, 1 input error, 2 configuration
or usage error. Stochastic stages require an explicit ``--seed``;
``--threads`` never changes outputs.
"""

from __future__ import annotations

import functools
import hashlib
import json
import sys
import time
from pathlib import Path

import click
from click.core import ParameterSource

from . import __version__, balance as balance_mod, codeswitch as cs_mod
from . import corpus as corpus_mod, ieinstances as ie_mod, lexicon as lex_mod
from . import mlm as mlm_mod, vocab as vocab_mod, xsim as xsim_mod
from .errors import ConfigurationError, InputDataError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class _ConfigCliError(click.ClickException):
    exit_code = 2


def _stage(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigurationError as exc:
            raise _ConfigCliError(str(exc)) from exc
        except (InputDataError, OSError, json.JSONDecodeError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _require_seed(seed: int | None) -> int:
    if seed is None:
        raise ConfigurationError("this stage is stochastic; pass --seed explicitly")
    return seed


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(
    out_path: str | Path,
    subcommand: str,
    config: dict,
    seed: int | None,
    inputs: list[str | Path],
    outputs: list[str | Path],
    started: float,
    extra: dict | None = None,
) -> Path:
    manifest = {
        "tool_version": __version__,
        "subcommand": subcommand,
        "config": config,
        "master_seed": seed,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "duration_seconds": round(time.monotonic() - started, 6),
    }
    if extra:
        manifest.update(extra)
    path = Path(f"{out_path}.manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _config_section(config_path: str | None, section: str) -> dict:
    if not config_path:
        return {}
    with open(config_path, "rb") as fh:
        data = tomllib.load(fh)
    sect = data.get(section, {})
    if not isinstance(sect, dict):
        raise ConfigurationError(f"config section [{section}] must be a table")
    return sect


def _resolve(ctx: click.Context, param: str, value, section: dict, key: str | None = None):
    """CLI flag beats config file beats the click default."""
    key = key or param
    if ctx.get_parameter_source(param) == ParameterSource.DEFAULT and key in section:
        return section[key]
    return value


_seed_option = click.option("--seed", type=int, default=None, help="Master seed (required for stochastic stages).")
_threads_option = click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, help="Worker threads; never changes outputs.")
_config_option = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="TOML config file; flags take precedence.")


@click.group()
@click.version_option(version=__version__, prog_name="biprep")
def main() -> None:
    """Bilingual (English-Arabic) pre-training data pipeline."""


@main.command()
@click.option("--lang", type=click.Choice(corpus_mod.LANGS), required=True)
@click.option("--source", type=str, default="other", show_default=True)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--fmt", type=click.Choice(["auto", "text", "jsonl"]), default="auto", show_default=True)
@click.option("--emit", type=click.Choice(["documents", "sentences"]), default="documents", show_default=True)
@_seed_option
@_threads_option
@_stage
def ingest(lang, source, in_path, out_path, fmt, emit, seed, threads):
    """Ingest raw text or JSONL files into document or sentence records."""
    started = time.monotonic()
    errors: list[corpus_mod.RecordError] = []
    docs = corpus_mod.ingest_tree(in_path, source=source, lang=lang, fmt=fmt, errors=errors)
    if emit == "documents":
        n = corpus_mod.write_documents(docs, out_path)
    else:
        n = corpus_mod.write_sentences(
            (s for d in docs for s in corpus_mod.split_sentences(d)), out_path
        )
    inputs = [in_path] if Path(in_path).is_file() else sorted(
        p for p in Path(in_path).rglob("*") if p.is_file()
    )
    _write_manifest(
        out_path, "ingest",
        {"lang": lang, "source": source, "fmt": fmt, "emit": emit, "in": str(in_path), "out": str(out_path)},
        seed, inputs, [out_path], started,
        extra={"records_written": n, "record_errors": len(errors)},
    )
    click.echo(f"wrote {n} {emit} ({len(errors)} record errors)")


@main.command()
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_threads_option
@_stage
def stats(in_path, out_path, seed, threads):
    """Count tokens and sentences per language and source."""
    started = time.monotonic()
    result = balance_mod.count(corpus_mod.read_sentences(in_path))
    result.save(out_path)
    _write_manifest(out_path, "stats", {"in": str(in_path), "out": str(out_path)}, seed, [in_path], [out_path], started)
    click.echo(f"total tokens: {result.total_tokens}")


@main.command()
@click.option("--plan", "plan_path", type=click.Path(exists=True, dir_okay=False), default=None, help="TOML plan; default repeats ar.wiki x5 and ar.gigaword x3.")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_threads_option
@_stage
def balance(plan_path, in_path, out_path, seed, threads):
    """Up-sample sentences according to a balance plan."""
    started = time.monotonic()
    plan = balance_mod.BalancePlan.from_toml(plan_path) if plan_path else balance_mod.default_plan()
    n = corpus_mod.write_sentences(
        balance_mod.upsample(corpus_mod.read_sentences(in_path), plan), out_path
    )
    inputs = [in_path] + ([plan_path] if plan_path else [])
    config = {
        "plan": {f"{lang}.{source}": mult for (lang, source), mult in sorted(plan.multipliers.items())},
        "in": str(in_path), "out": str(out_path),
    }
    _write_manifest(out_path, "balance", config, seed, inputs, [out_path], started, extra={"sentences_written": n})
    click.echo(f"wrote {n} sentences")


@main.command("train-vocab")
@click.option("--scheme", type=click.Choice(["wordpiece", "unigram"]), default="wordpiece", show_default=True)
@click.option("--size", type=int, default=50000, show_default=True)
@click.option("--cased/--uncased", "cased", default=False, show_default=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_config_option
@_seed_option
@_threads_option
@click.pass_context
@_stage
def train_vocab(ctx, scheme, size, cased, in_path, out_path, config_path, seed, threads):
    """Train a subword vocabulary from a sentence stream."""
    started = time.monotonic()
    section = _config_section(config_path, "vocab")
    scheme = _resolve(ctx, "scheme", scheme, section)
    size = int(_resolve(ctx, "size", size, section))
    cased = bool(_resolve(ctx, "cased", cased, section))
    sentences = corpus_mod.read_sentences(in_path)
    if scheme == "wordpiece":
        vocab = vocab_mod.train_wordpiece(sentences, size, cased)
    else:
        vocab = vocab_mod.train_unigram(sentences, size, cased)
    vocab_mod.save_vocab(vocab, out_path)
    config = {"scheme": scheme, "size": size, "cased": cased, "in": str(in_path), "out": str(out_path)}
    _write_manifest(out_path, "train-vocab", config, seed, [in_path], [out_path, f"{out_path}.json"], started, extra={"pieces": len(vocab)})
    click.echo(f"trained {scheme} vocab with {len(vocab)} pieces")


@main.command("merge-vocab")
@click.option("--a", "a_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--b", "b_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--target", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_threads_option
@_stage
def merge_vocab(a_path, b_path, target, out_path, seed, threads):
    """Union two vocabularies and pad with unused symbols to the target size."""
    started = time.monotonic()
    merged = vocab_mod.merge_vocabs(vocab_mod.load_vocab(a_path), vocab_mod.load_vocab(b_path), target)
    vocab_mod.save_vocab(merged, out_path)
    n_unused = sum(1 for p in merged.pieces if vocab_mod.UNUSED_RE.match(p))
    config = {"a": str(a_path), "b": str(b_path), "target": target, "out": str(out_path)}
    _write_manifest(out_path, "merge-vocab", config, seed, [a_path, b_path], [out_path, f"{out_path}.json"], started, extra={"unused_pieces": n_unused})
    click.echo(f"merged vocab: {len(merged)} pieces ({n_unused} unused)")


@main.command("segment")
@click.option("--vocab", "vocab_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False, allow_dash=True), default="-", show_default=True)
@click.option("--out", "out_path", type=click.Path(allow_dash=True), default="-", show_default=True)
@_seed_option
@_threads_option
@_stage
def segment_cmd(vocab_path, in_path, out_path, seed, threads):
    """Segment whitespace-tokenized lines into vocabulary pieces."""
    vocab = vocab_mod.load_vocab(vocab_path)
    in_fh = sys.stdin if in_path == "-" else open(in_path, encoding="utf-8")
    out_fh = sys.stdout if out_path == "-" else open(out_path, "w", encoding="utf-8", newline="\n")
    try:
        for line in in_fh:
            pieces: list[str] = []
            for token in line.split():
                pieces.extend(vocab_mod.segment(token, vocab).pieces)
            out_fh.write(" ".join(pieces) + "\n")
    finally:
        if in_fh is not sys.stdin:
            in_fh.close()
        if out_fh is not sys.stdout:
            out_fh.close()


@main.group()
def lexicon() -> None:
    """Bilingual dictionary utilities."""


@lexicon.command("convert")
@click.option("--format", "fmt", type=click.Choice(sorted(lex_mod.TIERS)), required=True)
@click.option("--direction", type=click.Choice(lex_mod.DIRECTIONS), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_stage
def lexicon_convert(fmt, direction, in_path, out_path, seed):
    """Load a native-format dictionary and write the canonical TSV."""
    started = time.monotonic()
    lex = lex_mod.load(in_path, fmt, direction)
    lex_mod.save(lex, out_path)
    config = {"format": fmt, "direction": direction, "in": str(in_path), "out": str(out_path)}
    _write_manifest(out_path, "lexicon convert", config, seed, [in_path], [out_path], started, extra={"entries": len(lex)})
    click.echo(f"{len(lex)} entries")


@lexicon.command("merge")
@click.option("--direction", type=click.Choice(lex_mod.DIRECTIONS), required=True)
@click.option("--in", "in_paths", type=click.Path(exists=True, dir_okay=False), multiple=True, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_stage
def lexicon_merge(direction, in_paths, out_path, seed):
    """Merge canonical TSV dictionaries, keeping tier priority."""
    started = time.monotonic()
    merged = lex_mod.merge([lex_mod.load_canonical(p, direction) for p in in_paths])
    lex_mod.save(merged, out_path)
    config = {"direction": direction, "in": [str(p) for p in in_paths], "out": str(out_path)}
    _write_manifest(out_path, "lexicon merge", config, seed, list(in_paths), [out_path], started, extra={"entries": len(merged)})
    click.echo(f"{len(merged)} entries")


@lexicon.command("stats")
@click.option("--direction", type=click.Choice(lex_mod.DIRECTIONS), required=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_stage
def lexicon_stats(direction, in_path, out_path, seed):
    """Per-tier entry counts and mean translations per entry."""
    started = time.monotonic()
    lex = lex_mod.load_canonical(in_path, direction)
    result = lex_mod.stats(lex)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(out_path, "lexicon stats", {"direction": direction, "in": str(in_path)}, seed, [in_path], [out_path], started)
    click.echo(json.dumps(result.to_json()))


@main.group(invoke_without_command=True)
@click.option("--sent", "sentence_threshold", type=float, default=0.5, show_default=True)
@click.option("--tok", "token_threshold", type=float, default=0.3, show_default=True)
@click.option("--dicts", type=str, default="wiki,panlex,muse", show_default=True, help="Comma-separated subset of wiki,panlex,muse.")
@click.option("--mode", type=click.Choice(cs_mod.MODES), default="s2", show_default=True)
@click.option("--lex-en2ar", "lex_en2ar_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Canonical TSV lexicon for English sentences.")
@click.option("--lex-ar2en", "lex_ar2en_path", type=click.Path(exists=True, dir_okay=False), default=None, help="Canonical TSV lexicon for Arabic sentences.")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--report", "report_path", type=click.Path(), default=None)
@click.option("--fold-case/--no-fold-case", default=True, show_default=True)
@_config_option
@_seed_option
@_threads_option
@click.pass_context
@_stage
def codeswitch(ctx, sentence_threshold, token_threshold, dicts, mode, lex_en2ar_path,
               lex_ar2en_path, in_path, out_path, report_path, fold_case, config_path,
               seed, threads):
    """Generate code-switched sentences by tiered dictionary substitution."""
    if ctx.invoked_subcommand is not None:
        return
    started = time.monotonic()
    section = _config_section(config_path, "codeswitch")
    sentence_threshold = float(_resolve(ctx, "sentence_threshold", sentence_threshold, section))
    token_threshold = float(_resolve(ctx, "token_threshold", token_threshold, section))
    mode = _resolve(ctx, "mode", mode, section)
    dicts_value = _resolve(ctx, "dicts", dicts, section, key="dictionaries")
    if isinstance(dicts_value, str):
        dictionaries = frozenset(d.strip() for d in dicts_value.split(",") if d.strip())
    else:
        dictionaries = frozenset(dicts_value)

    if in_path is None or out_path is None:
        raise ConfigurationError("codeswitch requires --in and --out")
    if lex_en2ar_path is None and lex_ar2en_path is None:
        raise ConfigurationError("codeswitch requires at least one of --lex-en2ar / --lex-ar2en")
    seed = _require_seed(seed)

    cfg = cs_mod.CodeSwitchConfig(
        sentence_threshold=sentence_threshold,
        token_threshold=token_threshold,
        dictionaries=dictionaries,
        seed=seed,
        mode=mode,
    )
    lex_en2ar = lex_mod.load_canonical(lex_en2ar_path, "en2ar") if lex_en2ar_path else None
    lex_ar2en = lex_mod.load_canonical(lex_ar2en_path, "ar2en") if lex_ar2en_path else None
    switched, report = cs_mod.augment(
        corpus_mod.read_sentences(in_path), lex_en2ar, lex_ar2en, cfg,
        fold_case=fold_case, threads=threads,
    )
    corpus_mod.write_sentences(switched, out_path)
    if report_path:
        with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_json(), fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")

    config = {
        "name": cfg.name,
        "sentence_threshold": sentence_threshold,
        "token_threshold": token_threshold,
        "dictionaries": sorted(dictionaries),
        "mode": mode,
        "fold_case": fold_case,
        "lex_en2ar": str(lex_en2ar_path) if lex_en2ar_path else None,
        "lex_ar2en": str(lex_ar2en_path) if lex_ar2en_path else None,
        "in": str(in_path), "out": str(out_path),
    }
    inputs = [in_path] + [p for p in (lex_en2ar_path, lex_ar2en_path) if p]
    outputs = [out_path] + ([report_path] if report_path else [])
    _write_manifest(out_path, "codeswitch", config, seed, inputs, outputs, started, extra=report.to_json())
    click.echo(
        f"switched {report.sentences_switched}/{report.sentences_total} sentences "
        f"({report.realized_sentence_fraction:.3f})"
    )


@codeswitch.command("matrix")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_seed_option
@_stage
def codeswitch_matrix(out_dir, seed):
    """Write the 18 named experiment configuration files."""
    paths = cs_mod.write_matrix(out_dir, seed=seed if seed is not None else 0)
    click.echo(f"wrote {len(paths)} configs to {out_dir}")


@main.command("mlm")
@click.option("--vocab", "vocab_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--max-len", type=int, default=128, show_default=True)
@click.option("--scheme", type=click.Choice(["whole_word", "subword"]), default="subword", show_default=True)
@click.option("--mask-rate", type=float, default=0.15, show_default=True)
@click.option("--nsp/--no-nsp", default=True, show_default=True)
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_config_option
@_seed_option
@_threads_option
@click.pass_context
@_stage
def mlm_cmd(ctx, vocab_path, max_len, scheme, mask_rate, nsp, in_path, out_path, config_path, seed, threads):
    """Generate masked-LM training examples in the MLMX binary format."""
    started = time.monotonic()
    section = _config_section(config_path, "mlm")
    max_len = int(_resolve(ctx, "max_len", max_len, section))
    scheme = _resolve(ctx, "scheme", scheme, section)
    mask_rate = float(_resolve(ctx, "mask_rate", mask_rate, section))
    seed = _require_seed(seed)

    vocab = vocab_mod.load_vocab(vocab_path)
    policy = mlm_mod.MaskingPolicy(scheme=scheme, mask_rate=mask_rate, seed=seed)
    pairs = mlm_mod.pack(corpus_mod.read_sentences(in_path), vocab, max_len, seed, nsp=nsp)
    examples = mlm_mod.mask_all(pairs, vocab, policy, max_len, threads=threads)
    n = mlm_mod.write_examples(examples, out_path, max_len)

    config = {
        "vocab": str(vocab_path), "max_len": max_len, "scheme": scheme,
        "mask_rate": mask_rate, "nsp": nsp, "in": str(in_path), "out": str(out_path),
    }
    _write_manifest(out_path, "mlm", config, seed, [vocab_path, in_path], [out_path], started, extra={"examples": n})
    click.echo(f"wrote {n} examples (max_len={max_len}, cap={mlm_mod.predictions_cap(max_len)})")


@main.group()
def ie() -> None:
    """Build classification instances from annotated documents."""


@ie.command("build-arl")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_seed_option
@_threads_option
@_stage
def ie_build_arl(in_path, out_path, seed, threads):
    """Trigger-entity role instances (gold roles + same-sentence negatives)."""
    started = time.monotonic()
    instances: list[ie_mod.IEInstance] = []
    for doc in ie_mod.read_docs(in_path):
        instances.extend(ie_mod.build_arl(doc))
    n = ie_mod.write_instances(instances, out_path)
    _write_manifest(out_path, "ie build-arl", {"in": str(in_path), "out": str(out_path)}, seed, [in_path], [out_path], started, extra={"instances": n})
    click.echo(f"wrote {n} instances")


@ie.command("build-re")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--negative-ratio", type=float, default=1.0, show_default=True)
@_seed_option
@_threads_option
@_stage
def ie_build_re(in_path, out_path, negative_ratio, seed, threads):
    """Relation instances (gold positives + sampled negative pairs)."""
    started = time.monotonic()
    seed = _require_seed(seed)
    instances: list[ie_mod.IEInstance] = []
    for doc in ie_mod.read_docs(in_path):
        instances.extend(ie_mod.build_re(doc, negative_ratio, seed))
    n = ie_mod.write_instances(instances, out_path)
    config = {"in": str(in_path), "out": str(out_path), "negative_ratio": negative_ratio}
    _write_manifest(out_path, "ie build-re", config, seed, [in_path], [out_path], started, extra={"instances": n})
    click.echo(f"wrote {n} instances")


@ie.command("split")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--fractions", type=str, default="0.8,0.1,0.1", show_default=True)
@_seed_option
@_threads_option
@_stage
def ie_split(in_path, out_path, fractions, seed, threads):
    """Shuffle documents into train/dev/test id lists."""
    started = time.monotonic()
    seed = _require_seed(seed)
    try:
        parts = tuple(float(x) for x in fractions.split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad fractions {fractions!r}") from exc
    if len(parts) != 3:
        raise ConfigurationError("fractions must have exactly 3 comma-separated values")
    doc_ids = [doc.doc_id for doc in ie_mod.read_docs(in_path)]
    train, dev, test = ie_mod.split(doc_ids, parts, seed)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"train": train, "dev": dev, "test": test}, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    config = {"in": str(in_path), "out": str(out_path), "fractions": list(parts)}
    _write_manifest(out_path, "ie split", config, seed, [in_path], [out_path], started,
                    extra={"sizes": [len(train), len(dev), len(test)]})
    click.echo(f"split {len(doc_ids)} docs into {len(train)}/{len(dev)}/{len(test)}")


@main.group()
def xsim() -> None:
    """Cross-lingual embedding similarity analysis."""


@xsim.command("profile")
@click.option("--a", "a_path", type=click.Path(exists=True, dir_okay=False), required=True, help="First EMBD dump (e.g. English).")
@click.option("--b", "b_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Second EMBD dump (e.g. Arabic).")
@click.option("--align", "align_path", type=click.Path(exists=True, dir_okay=False), required=True, help="TSV of aligned sentence ids.")
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--random-mode", type=click.Choice(["cross", "within"]), default="cross", show_default=True)
@_seed_option
@_threads_option
@_stage
def xsim_profile(a_path, b_path, align_path, out_path, random_mode, seed, threads):
    """Per-layer bitext vs. random mean cosine similarity (CSV output)."""
    started = time.monotonic()
    seed = _require_seed(seed)
    dump_a = xsim_mod.read_dump(a_path)
    dump_b = xsim_mod.read_dump(b_path)
    alignment = xsim_mod.read_alignment(align_path)
    result = xsim_mod.profile(dump_a, dump_b, alignment, seed, random_mode=random_mode)
    result.to_csv(out_path)
    config = {"a": str(a_path), "b": str(b_path), "align": str(align_path), "random_mode": random_mode, "out": str(out_path)}
    _write_manifest(out_path, "xsim profile", config, seed, [a_path, b_path, align_path], [out_path], started,
                    extra={"pair_count": result.pair_count})
    click.echo(f"profiled {result.pair_count} pairs over {len(result.layers)} layers")


@xsim.command("check")
@click.option("--in", "in_path", type=click.Path(exists=True, dir_okay=False), required=True)
@_stage
def xsim_check(in_path):
    """Validate an EMBD dump file; exits 1 with a report if invalid."""
    issues = xsim_mod.check_dump(in_path)
    if issues:
        for issue in issues:
            click.echo(f"INVALID: {issue}", err=True)
        raise click.ClickException(f"{in_path}: {len(issues)} problem(s)")
    dump = xsim_mod.read_dump(in_path)
    click.echo(
        f"ok: {len(dump.sentences)} sentences, n_layers={dump.n_layers}, dim={dump.dim}"
    )


if __name__ == "__main__":
    main()
