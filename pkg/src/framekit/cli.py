"""Command-line entry point wiring the toolkit into experiment runs.

Commands: ingest, stats, encode, decode, prompt, export-finetune, subsample,
run-eval, frame-id, correlate, report. Every run command serializes its
configuration into the output directory, and every command with a --seed is
reproducible bit-for-bit given the same inputs and cache state.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import click
import numpy as np

import framekit
from framekit.corpus import (
    CorpusPart,
    Lexicon,
    SplitConfig,
    SplitLabel,
    corpus_stats,
    default_split_config,
    export_interchange,
    file_checksum,
    load_fulltext,
    load_interchange,
    load_lexicon,
    record_to_instance,
    split_corpus,
    unseen_partition,
)
from framekit.errors import FramekitError
from framekit.evaluation import (
    BENCHMARK_COLUMNS,
    DEFAULT_POLICY as DEFAULT_MATCHING,
    load_correlation_csv,
    partial_correlation,
    report_bundle_json,
    score_instance,
    split_report,
    write_per_frame_csv,
)
from framekit.frame_id import (
    apply_lexicon_filter,
    candidates_for_target,
    evaluate_frame_id,
    identify_frame,
)
from framekit.llm_client import (
    CompletionCache,
    HttpBackend,
    ModelEndpoint,
    OracleBackend,
    ReplayBackend,
    complete_batch,
)
from framekit.prompting import (
    ExemplarPolicy,
    FineTuneExportConfig,
    SubsampleStrategy,
    build_finetune_record,
    export_finetune_jsonl,
    prompt_for_instance,
    saturation_subsets,
    subsample,
)
from framekit.representations import PredictionSet, RepresentationFormat, decode, encode

FORMAT_CHOICES = [f.value for f in RepresentationFormat]


@dataclass
class RunConfig:
    """Everything a run needs, validated before any side effect."""

    cache_dir: str = ""
    split: str = "test"
    ood_path: str = ""
    format: str = RepresentationFormat.JSON_EXISTING.value
    backend: str = "oracle:perfect"
    base_url: str = ""
    model_name: str = ""
    temperature: float = 0.0
    max_output_tokens: int | None = None
    api_key_env: str = "OPENAI_API_KEY"
    max_frame_exemplars: int = 3
    max_fe_examples: int = 1
    include_exemplars: bool = True
    seed: int = 0
    out_dir: str = ""
    max_in_flight: int = 8
    template_dir: str = ""
    limit: int = 0

    @classmethod
    def load(cls, config_path: str | None, **overrides) -> "RunConfig":
        config = cls()
        if config_path:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
            for key, value in data.items():
                if not hasattr(config, key):
                    raise click.UsageError(f"unknown config key {key!r} in {config_path}")
                setattr(config, key, value)
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        config.validate()
        return config

    def validate(self) -> None:
        if self.format not in FORMAT_CHOICES:
            raise click.UsageError(f"unknown format {self.format!r}")
        if self.split not in ("train", "test", "ood"):
            raise click.UsageError(f"unknown split {self.split!r}")
        if self.split == "ood":
            if not self.ood_path:
                raise click.UsageError("--ood-path is required for the ood split")
            if not Path(self.ood_path).is_file():
                raise click.UsageError(f"ood file not found: {self.ood_path}")
        if self.max_in_flight < 1:
            raise click.UsageError("--max-in-flight must be >= 1")
        kind = self.backend.split(":", 1)[0]
        if kind not in ("http", "replay", "oracle"):
            raise click.UsageError(f"unknown backend {self.backend!r}")
        if kind == "http" and not (self.base_url and self.model_name):
            raise click.UsageError("http backend needs --base-url and --model-name")
        if kind == "replay":
            if ":" not in self.backend:
                raise click.UsageError("replay backend spec must be replay:<cache path>")
            if not Path(self.backend.split(":", 1)[1]).is_file():
                raise click.UsageError(f"replay cache not found: {self.backend.split(':', 1)[1]}")
        if kind == "oracle":
            mode = self.backend.split(":", 1)[1] if ":" in self.backend else ""
            if mode not in ("perfect", "empty", "corrupt"):
                raise click.UsageError("oracle backend spec must be oracle:{perfect|empty|corrupt}")

    def rep_format(self) -> RepresentationFormat:
        return RepresentationFormat(self.format)

    def policy(self) -> ExemplarPolicy:
        return ExemplarPolicy(
            max_frame_exemplars=self.max_frame_exemplars,
            max_fe_examples=self.max_fe_examples,
            include_exemplars=self.include_exemplars,
        )

    def write(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"
        (out_dir / "run_config.json").write_text(payload, encoding="utf-8")


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def _load_cache(cache_dir: str | Path) -> tuple[Lexicon, CorpusPart, CorpusPart, dict]:
    cache = Path(cache_dir)
    lexicon_path = cache / "lexicon.json"
    if not lexicon_path.is_file():
        raise _fail(f"no ingest cache at {cache} (run `framekit ingest` first)")
    lexicon = Lexicon.from_dict(json.loads(lexicon_path.read_text(encoding="utf-8")))
    train, _ = load_interchange(cache / "train.jsonl", lexicon, SplitLabel.TRAIN)
    test, _ = load_interchange(cache / "test.jsonl", lexicon, SplitLabel.TEST)
    stats = json.loads((cache / "stats.json").read_text(encoding="utf-8"))
    return lexicon, train, test, stats


def _pick_split(config: RunConfig, lexicon: Lexicon, train: CorpusPart, test: CorpusPart) -> CorpusPart:
    if config.split == "train":
        return train
    if config.split == "test":
        return test
    part, _ = load_interchange(config.ood_path, lexicon)
    return part


def _build_backend(config: RunConfig, fmt: RepresentationFormat, gold_map: dict):
    kind, _, arg = config.backend.partition(":")
    if kind == "oracle":
        return OracleBackend(arg, fmt, gold_map, corrupt_seed=config.seed)
    if kind == "replay":
        return ReplayBackend(arg)
    endpoint = ModelEndpoint(
        base_url=config.base_url,
        model_name=config.model_name,
        temperature=config.temperature,
        max_output_tokens=config.max_output_tokens,
        api_key_env=config.api_key_env,
    )
    return HttpBackend(endpoint)


def _echo_stats(label: str, stats_dict: dict) -> None:
    click.echo(
        f"{label}: {stats_dict['sentences']:,} sentences, "
        f"{stats_dict['frame_instances']:,} frame instances, "
        f"{stats_dict['fes']:,} frame elements"
    )


@click.group()
@click.version_option(version=framekit.__version__)
def main() -> None:
    """Frame-semantic argument identification toolkit."""


# --- ingest / stats ------------------------------------------------------------


@main.command()
@click.option("--framenet-dir", required=True, type=click.Path(), help="FrameNet 1.7 root directory.")
@click.option("--split-config", "split_config_path", type=click.Path(), default=None,
              help="JSON with train_docs/test_docs; defaults to the shipped split.")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="Cache directory to write.")
@click.option("--json", "as_json", is_flag=True, help="Print machine-readable stats.")
def ingest(framenet_dir: str, split_config_path: str | None, out_dir: str, as_json: bool) -> None:
    """Parse a FrameNet directory into the corpus cache and print counts."""
    try:
        split_config = (
            SplitConfig.from_file(split_config_path) if split_config_path else default_split_config()
        )
        lexicon = load_lexicon(framenet_dir)
        documents, report = load_fulltext(framenet_dir, lexicon)
        train, test, excluded = split_corpus(documents, split_config, lexicon)
    except FramekitError as exc:
        raise _fail(str(exc)) from exc

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "lexicon.json").write_text(
        json.dumps(lexicon.to_dict(), ensure_ascii=False), encoding="utf-8"
    )
    export_interchange(train.instances, out / "train.jsonl")
    export_interchange(test.instances, out / "test.jsonl")
    stats = {
        "toolkit_version": framekit.__version__,
        "n_frames": len(lexicon),
        "train": corpus_stats(train.instances).as_dict(),
        "test": corpus_stats(test.instances).as_dict(),
        "train_documents": list(train.documents),
        "test_documents": list(test.documents),
        "excluded_documents": excluded,
        "load_report": report.as_dict(),
        "checksum": file_checksum(out / "train.jsonl", out / "test.jsonl"),
    }
    (out / "stats.json").write_text(
        json.dumps(stats, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if as_json:
        click.echo(json.dumps(stats, sort_keys=True))
    else:
        click.echo(f"frames: {len(lexicon):,}")
        _echo_stats("train", stats["train"])
        _echo_stats("test", stats["test"])
        if excluded:
            click.echo(f"excluded documents (in neither split): {', '.join(excluded)}")


@main.command()
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def stats(cache_dir: str, as_json: bool) -> None:
    """Print the counts recorded at ingest time."""
    stats_path = Path(cache_dir) / "stats.json"
    if not stats_path.is_file():
        raise _fail(f"no stats at {stats_path}")
    data = json.loads(stats_path.read_text(encoding="utf-8"))
    if as_json:
        click.echo(json.dumps(data, sort_keys=True))
    else:
        click.echo(f"frames: {data['n_frames']:,}")
        _echo_stats("train", data["train"])
        _echo_stats("test", data["test"])


# --- one-off codec commands ------------------------------------------------------


@main.command("encode")
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--format", "format_name", type=click.Choice(FORMAT_CHOICES), required=True)
@click.option("--in", "in_path", type=click.Path(), default=None,
              help="Interchange JSONL; defaults to stdin.")
def encode_cmd(cache_dir: str, format_name: str, in_path: str | None) -> None:
    """Encode interchange records into the chosen representation."""
    lexicon, _, _, _ = _load_cache(cache_dir)
    fmt = RepresentationFormat(format_name)
    source = Path(in_path).open("r", encoding="utf-8") if in_path else sys.stdin
    with source:
        for line_no, line in enumerate(source, start=1):
            if not line.strip():
                continue
            instance = record_to_instance(json.loads(line), lexicon, line_no)
            frame_def = lexicon.frame(instance.frame_name)
            if frame_def is None:
                raise _fail(f"line {line_no}: frame {instance.frame_name!r} not in lexicon")
            click.echo(encode(fmt, instance, frame_def))


@main.command("decode")
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--format", "format_name", type=click.Choice(FORMAT_CHOICES), required=True)
@click.option("--frame", "frame_name", required=True)
@click.option("--sentence", default="", help="Original sentence (used by the xml format).")
@click.option("--in", "in_path", type=click.Path(), default=None,
              help="Raw model output file; defaults to stdin.")
def decode_cmd(cache_dir: str, format_name: str, frame_name: str, sentence: str, in_path: str | None) -> None:
    """Decode raw model output into (element, text) predictions."""
    lexicon, _, _, _ = _load_cache(cache_dir)
    frame_def = lexicon.frame(frame_name)
    if frame_def is None:
        raise _fail(f"frame {frame_name!r} not in lexicon")
    raw = Path(in_path).read_text(encoding="utf-8") if in_path else sys.stdin.read()
    prediction = decode(RepresentationFormat(format_name), raw, frame_def, sentence)
    click.echo(
        json.dumps(
            {
                "entries": [list(pair) for pair in prediction.entries],
                "warnings": [{"kind": w.kind, "detail": w.detail} for w in prediction.warnings],
            },
            ensure_ascii=False,
        )
    )


@main.command("prompt")
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["train", "test"]), default="test")
@click.option("--format", "format_name", type=click.Choice(FORMAT_CHOICES),
              default=RepresentationFormat.JSON_EXISTING.value)
@click.option("--index", type=int, default=0, help="Instance index within the split.")
@click.option("--finetune", is_flag=True, help="Show the fine-tuning record instead.")
@click.option("--max-frame-exemplars", type=int, default=3)
@click.option("--max-fe-examples", type=int, default=1)
@click.option("--no-exemplars", is_flag=True)
def prompt_cmd(cache_dir: str, split: str, format_name: str, index: int, finetune: bool,
               max_frame_exemplars: int, max_fe_examples: int, no_exemplars: bool) -> None:
    """Print the prompt built for one instance."""
    lexicon, train, test, _ = _load_cache(cache_dir)
    part = train if split == "train" else test
    if not (0 <= index < len(part.instances)):
        raise _fail(f"index {index} out of range (split has {len(part.instances)} instances)")
    instance = part.instances[index]
    frame_def = lexicon.frame(instance.frame_name)
    if frame_def is None:
        raise _fail(f"frame {instance.frame_name!r} not in lexicon")
    fmt = RepresentationFormat(format_name)
    if finetune:
        record = build_finetune_record(instance, frame_def, fmt)
        click.echo("--- system ---")
        click.echo(record.system)
        click.echo("--- user ---")
        click.echo(record.user)
        click.echo("--- assistant ---")
        click.echo(record.gold_assistant)
    else:
        policy = ExemplarPolicy(max_frame_exemplars, max_fe_examples, not no_exemplars)
        record = prompt_for_instance(instance, frame_def, fmt, policy)
        click.echo(record.user)


# --- dataset commands ------------------------------------------------------------


@main.command("export-finetune")
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--split", type=click.Choice(["train", "test"]), default="train")
@click.option("--format", "format_name", type=click.Choice(FORMAT_CHOICES),
              default=RepresentationFormat.JSON_EXISTING.value)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--lora-rank", type=int, default=None,
              help="Recorded in the manifest for provenance; training is external.")
@click.option("--strategy", type=click.Choice([s.value for s in SubsampleStrategy]), default=None,
              help="Optionally export only a per-frame subsample.")
@click.option("--k", type=int, default=5)
@click.option("--seed", type=int, default=0)
def export_finetune_cmd(cache_dir: str, split: str, format_name: str, out_path: str,
                        lora_rank: int | None, strategy: str | None, k: int, seed: int) -> None:
    """Export chat-format fine-tuning JSONL (one messages object per line)."""
    lexicon, train, test, _ = _load_cache(cache_dir)
    instances = list((train if split == "train" else test).instances)
    if strategy:
        instances = subsample(instances, SubsampleStrategy(strategy), k=k, seed=seed)
    manifest = export_finetune_jsonl(
        instances,
        lexicon,
        FineTuneExportConfig(
            format=RepresentationFormat(format_name),
            output_path=out_path,
            lora_rank_note=lora_rank,
        ),
    )
    manifest_path = Path(out_path).with_suffix(Path(out_path).suffix + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    click.echo(f"wrote {manifest['record_count']:,} records to {out_path}")
    click.echo(f"token estimate (chars/4): {manifest['token_estimate']:,}")


@main.command("subsample")
@click.option("--cache", "cache_dir", required=True, type=click.Path())
@click.option("--strategy", type=click.Choice([s.value for s in SubsampleStrategy]), required=True)
@click.option("--k", type=int, default=5)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--fractions", default="", help="Comma-separated fractions for nested saturation subsets.")
def subsample_cmd(cache_dir: str, strategy: str, k: int, seed: int, out_dir: str, fractions: str) -> None:
    """Write a per-frame training subsample (and optional saturation subsets)."""
    lexicon, train, _, _ = _load_cache(cache_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    selected = subsample(list(train.instances), SubsampleStrategy(strategy), k=k, seed=seed)
    export_interchange(selected, out / "selected.jsonl")
    manifest = {
        "strategy": strategy,
        "k": k,
        "seed": seed,
        "selected": len(selected),
        "total": len(train.instances),
        "fraction": len(selected) / len(train.instances) if train.instances else 0.0,
        "instance_keys": [instance.instance_key for instance in selected],
    }
    if fractions:
        grid = sorted(float(f) for f in fractions.split(","))
        subsets = saturation_subsets(list(train.instances), grid, seed=seed)
        manifest["saturation"] = [
            {"fraction": fraction, "size": len(subset)} for fraction, subset in zip(grid, subsets)
        ]
        for fraction, subset in zip(grid, subsets):
            export_interchange(subset, out / f"saturation_{int(round(fraction * 100)):03d}.jsonl")
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    click.echo(
        f"selected {manifest['selected']:,} of {manifest['total']:,} instances "
        f"({manifest['fraction']:.1%})"
    )


# --- evaluation runs ---------------------------------------------------------------


@main.command("run-eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--cache", "cache_dir", type=click.Path(), default=None)
@click.option("--split", type=click.Choice(["train", "test", "ood"]), default=None)
@click.option("--ood-path", type=click.Path(), default=None)
@click.option("--format", "format", type=click.Choice(FORMAT_CHOICES), default=None)
@click.option("--backend", default=None, help="http | replay:<cache> | oracle:{perfect|empty|corrupt}")
@click.option("--base-url", default=None)
@click.option("--model-name", default=None)
@click.option("--temperature", type=float, default=None)
@click.option("--max-output-tokens", type=int, default=None)
@click.option("--api-key-env", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--max-in-flight", type=int, default=None)
@click.option("--limit", type=int, default=None, help="Evaluate only the first N instances.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
def run_eval_cmd(config_path, **overrides) -> None:
    """Prompt, decode, and score a whole split; writes report JSON, per-frame
    CSV, and the completion cache."""
    out_dir = overrides.pop("out_dir", None)
    config = RunConfig.load(config_path, out_dir=out_dir, **overrides)
    if not config.cache_dir:
        raise click.UsageError("--cache is required")
    if not config.out_dir:
        raise click.UsageError("--out is required")

    lexicon, train, test, cache_stats = _load_cache(config.cache_dir)
    part = _pick_split(config, lexicon, train, test)
    instances = list(part.instances[: config.limit or None])

    fmt = config.rep_format()
    policy = config.policy()
    prompts = []
    gold_instances = []
    skipped_unresolved = 0
    for instance in instances:
        frame_def = lexicon.frame(instance.frame_name)
        if frame_def is None:
            skipped_unresolved += 1
            continue
        prompts.append(prompt_for_instance(instance, frame_def, fmt, policy,
                                           config.template_dir or None))
        gold_instances.append(instance)

    out = Path(config.out_dir)
    gold_map = OracleBackend.build_gold(gold_instances, lexicon)
    try:
        backend = _build_backend(config, fmt, gold_map)
    except (FramekitError, ValueError) as exc:
        raise _fail(str(exc)) from exc
    config.write(out)
    completion_cache = CompletionCache(out / "completions.jsonl")
    items = complete_batch(backend, prompts, config.max_in_flight, completion_cache)

    scores = []
    failures = 0
    for instance, item in zip(gold_instances, items):
        if item.ok:
            prediction = decode(fmt, item.text or "", lexicon.frame(instance.frame_name), instance.sentence_text)
        else:
            failures += 1
            prediction = PredictionSet(entries=(), warnings=())
        score = score_instance(instance, prediction, DEFAULT_MATCHING)
        if not item.ok:
            score = dataclasses.replace(score, warnings=score.warnings + ("backend_error",))
        scores.append(score)

    if config.split == "test" and train.instances:
        partition = unseen_partition(train, test)
        label_by_key = {}
        for label_name, group in (
            ("seen", partition.seen),
            ("unseen_frame", partition.unseen_frame),
            ("unseen_fe", partition.unseen_fe),
        ):
            for instance in group:
                label_by_key[instance.instance_key] = label_name
        labels = [label_by_key.get(instance.instance_key, "seen") for instance in gold_instances]
    else:
        labels = [part.label.value] * len(gold_instances)

    if not scores:
        raise _fail("no instances to score")
    reports = split_report(scores, labels)
    bundle = {
        "toolkit_version": framekit.__version__,
        "corpus_checksum": cache_stats.get("checksum", ""),
        "format": fmt.value,
        "split": config.split,
        "n_prompts": len(prompts),
        "n_failures": failures,
        "n_skipped_unresolved_frame": skipped_unresolved,
        "matching_policy": DEFAULT_MATCHING.as_dict(),
        "matching_policy_note": (
            "scores from other systems may rest on different matching rules; "
            "compare across toolkits with caution"
        ),
        "reports": {label: report.as_dict() for label, report in reports.items()},
    }
    (out / "report.json").write_text(report_bundle_json(bundle), encoding="utf-8")
    write_per_frame_csv(reports["All"], out / "per_frame.csv")

    for label in reports:
        r = reports[label]
        click.echo(
            f"{label}: n={r.n_instances} P={r.precision:.3f} R={r.recall:.3f} "
            f"F1={r.f1:.3f} Acc={r.accuracy:.3f}"
        )
    if failures:
        click.echo(f"failures: {failures} of {len(prompts)} prompts (scored as empty)")
    if skipped_unresolved:
        click.echo(f"skipped (frame not in lexicon): {skipped_unresolved}")


@main.command("frame-id")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--cache", "cache_dir", type=click.Path(), default=None)
@click.option("--format", "format", type=click.Choice(FORMAT_CHOICES), default=None)
@click.option("--backend", default=None)
@click.option("--base-url", default=None)
@click.option("--model-name", default=None)
@click.option("--temperature", type=float, default=None)
@click.option("--api-key-env", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--max-in-flight", type=int, default=None)
@click.option("--limit", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
def frame_id_cmd(config_path, **overrides) -> None:
    """Identify frames from predicted frame elements over candidate frames;
    reports accuracy with and without lexicon filtering in one pass."""
    out_dir = overrides.pop("out_dir", None)
    config = RunConfig.load(config_path, out_dir=out_dir, split="test", **overrides)
    if not config.cache_dir:
        raise click.UsageError("--cache is required")
    if not config.out_dir:
        raise click.UsageError("--out is required")

    lexicon, train, test, _ = _load_cache(config.cache_dir)
    instances = list(test.instances[: config.limit or None])
    fmt = config.rep_format()
    policy = config.policy()

    skipped_no_lu = 0
    skipped_no_candidates = 0
    targets = []  # (instance, candidate_set)
    for instance in instances:
        if not instance.lu_name or "." not in instance.lu_name:
            skipped_no_lu += 1
            continue
        lemma, pos = instance.lu_name.rsplit(".", 1)
        candidate_set = candidates_for_target(lexicon, lemma, pos, instance.target_key)
        if candidate_set is None:
            skipped_no_candidates += 1
            continue
        targets.append((instance, candidate_set))

    out = Path(config.out_dir)
    gold_map = OracleBackend.build_gold([instance for instance, _ in targets], lexicon)
    try:
        backend = _build_backend(config, fmt, gold_map)
    except (FramekitError, ValueError) as exc:
        raise _fail(str(exc)) from exc
    config.write(out)
    completion_cache = CompletionCache(out / "completions.jsonl")

    prompts = []
    keys = []
    for instance, candidate_set in targets:
        for frame_name in candidate_set.candidates:
            frame_def = lexicon.frame(frame_name)
            if frame_def is None:
                continue
            prompts.append(
                prompt_for_instance(instance, frame_def, fmt, policy,
                                    config.template_dir or None, frame_override=frame_def)
            )
            keys.append((instance.target_key, frame_name))
    items = complete_batch(backend, prompts, config.max_in_flight, completion_cache)

    predictions = {}
    for (target_key, frame_name), item in zip(keys, items):
        frame_def = lexicon.frame(frame_name)
        raw = item.text if item.ok else ""
        predictions[(target_key, frame_name)] = decode(fmt, raw or "", frame_def, "")

    pairs_without_lf = []
    pairs_with_lf = []
    with (out / "results.jsonl").open("w", encoding="utf-8", newline="\n") as handle:
        for instance, candidate_set in targets:
            result = identify_frame(
                candidate_set,
                lambda frame_name: predictions.get((candidate_set.target_uid, frame_name), PredictionSet()),
                rng_seed=config.seed,
            )
            filtered = apply_lexicon_filter(result)
            pairs_without_lf.append((result, instance.frame_name))
            pairs_with_lf.append((filtered, instance.frame_name))
            row = result.as_dict()
            row["gold_frame"] = instance.frame_name
            row["with_lexicon_filter"] = filtered.as_dict()
            handle.write(json.dumps(row, ensure_ascii=False))
            handle.write("\n")

    n_missing = skipped_no_lu + skipped_no_candidates
    summary = {
        "toolkit_version": framekit.__version__,
        "seed": config.seed,
        "format": fmt.value,
        "n_targets": len(targets) + n_missing,
        "skipped_no_lexical_unit": skipped_no_lu,
        "skipped_no_candidates": skipped_no_candidates,
        "without_lexicon_filter": evaluate_frame_id(pairs_without_lf, n_missing).as_dict(),
        "with_lexicon_filter": evaluate_frame_id(pairs_with_lf, n_missing).as_dict(),
    }
    (out / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    for key in ("without_lexicon_filter", "with_lexicon_filter"):
        s = summary[key]
        click.echo(
            f"{key}: All={s['acc_all']:.3f} Amb={s['acc_ambiguous']:.3f} "
            f"coverage={s['coverage']:.3f} (n={s['n_targets']})"
        )


# --- statistics ---------------------------------------------------------------------


@main.command("correlate")
@click.option("--csv", "csv_path", required=True, type=click.Path())
@click.option("--benchmark", type=click.Choice(list(BENCHMARK_COLUMNS)), default=None)
@click.option("--json", "as_json", is_flag=True)
def correlate_cmd(csv_path: str, benchmark: str | None, as_json: bool) -> None:
    """Partial correlation of benchmark scores with F1, controlling for size."""
    try:
        rows = load_correlation_csv(csv_path)
    except (OSError, KeyError, ValueError) as exc:
        raise _fail(f"cannot read correlation CSV: {exc}") from exc
    names = [benchmark] if benchmark else list(BENCHMARK_COLUMNS)
    values = {}
    for name in names:
        try:
            values[name] = partial_correlation(rows, name)
        except FramekitError as exc:
            raise _fail(str(exc)) from exc
        except ValueError as exc:
            raise _fail(str(exc)) from exc
    if as_json:
        click.echo(json.dumps(values, sort_keys=True))
    elif benchmark:
        click.echo(f"{values[benchmark]:+.6f}")
    else:
        for name in names:
            click.echo(f"{name}: {values[name]:+.6f}")


@main.command("report")
@click.option("--report", "report_path", required=True, type=click.Path())
def report_cmd(report_path: str) -> None:
    """Render a report JSON produced by run-eval."""
    data = json.loads(Path(report_path).read_text(encoding="utf-8"))
    click.echo(f"format: {data['format']}  split: {data['split']}")
    click.echo(f"corpus checksum: {data.get('corpus_checksum', '')[:16]}")
    for label, report in data["reports"].items():
        click.echo(
            f"{label}: n={report['n_instances']} P={report['precision']:.3f} "
            f"R={report['recall']:.3f} F1={report['f1']:.3f} Acc={report['accuracy']:.3f}"
        )
    per_frame = data["reports"]["All"].get("per_frame", {})
    if per_frame:
        f1s = np.array(sorted(value["f1"] for value in per_frame.values()))
        q = np.quantile(f1s, [0.0, 0.25, 0.5, 0.75, 1.0])
        click.echo("per-frame F1 quartiles: " + " ".join(f"{value:.3f}" for value in q))


if __name__ == "__main__":
    main()
