"""Command-line entry point.

Subcommands: ``battery`` (score integer samples), ``shuffle`` (entropy
convergence series), ``passwords`` (character analysis plus battery),
``llm`` (collect transcripts from an endpoint), and ``gen`` (emit local
generator samples to a file).

Every report-writing command drops a ``manifest.json`` next to its outputs
with the resolved configuration, content digests of all ingested files, the
tool version, and the output list.  Timestamps live only in the manifest,
so re-running an offline command over the same inputs reproduces its report
files byte for byte.

Exit codes: 0 success, 1 partial (some sources failed), 2 usage error,
3 all sources failed.
"""

from __future__ import annotations

import concurrent.futures
import datetime
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

from . import __version__
from .battery import BatteryConfig, run_battery
from .bitstream import IntegerSample, from_integers
from .harness import (
    SYSTEM_PROMPT,
    ChatClient,
    Endpoint,
    MissingCredentialsError,
    PromptConfig,
    load_transcript,
    request_integers,
    request_shuffles,
    run_tool_loop,
)
from .passwords import (
    DEFAULT_ALPHABET,
    PasswordCorpus,
    char_frequency,
    corpus_to_bits,
    repeated_substring_scan,
)
from .sources import (
    SampleSource,
    draw_integers,
    extract_integers,
    ingest_transcript,
    write_integers,
)
from .shuffle import (
    PermutationTrialSet,
    convergence_sweep,
    ingest_trials,
    uniform_shuffle_oracle,
)
from .verdict import aggregate, format_table, report_as_dict

_GENERATING_KINDS = ("os_entropy", "crypto_below", "seeded_deterministic", "biased")


def _dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _sha256(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(
    out_dir: Path, command: str, config: dict, inputs: list[Path], outputs: list[str]
) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        # failed sources may reference unreadable files; digest what exists
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "outputs": sorted(outputs),
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    (out_dir / "manifest.json").write_text(_dumps(manifest), encoding="utf-8")


def _histogram_csv(sample: IntegerSample) -> str:
    counts = np.bincount(sample.values, minlength=sample.declared_max + 1)
    lines = ["value,count"]
    for value in range(counts.size):
        if counts[value]:
            lines.append(f"{value},{int(counts[value])}")
    return "\n".join(lines) + "\n"


def _top_values(sample: IntegerSample, k: int = 3) -> list[list[int]]:
    counts = np.bincount(sample.values, minlength=sample.declared_max + 1)
    order = sorted(range(counts.size), key=lambda v: (-int(counts[v]), v))
    return [[v, int(counts[v])] for v in order[:k] if counts[v] > 0]


@click.group()
@click.version_option(version=__version__, prog_name="entropybench")
def main() -> None:
    """Randomness evaluation: test battery, shuffle entropy, LLM harness."""


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _build_source(kind: str, label: str, seed: int, bias_profile: Optional[str],
                  bias_value: int, bias_mass: float, bias_low: int, bias_high: int) -> SampleSource:
    params: dict = {}
    if kind == "seeded_deterministic":
        params["seed"] = seed
    if kind == "biased":
        if bias_profile is None:
            raise click.UsageError("--bias-profile is required for kind 'biased'")
        params = {"profile": bias_profile, "seed": seed, "value": bias_value,
                  "mass": bias_mass, "low": bias_low, "high": bias_high}
    return SampleSource(kind=kind, label=label or kind, params=params)


@main.command()
@click.option("--kind", type=click.Choice(_GENERATING_KINDS), default="os_entropy")
@click.option("--count", type=int, default=10000, show_default=True)
@click.option("--max", "upper", type=int, default=255, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--label", default="")
@click.option("--bias-profile", type=click.Choice(["constant", "top_heavy", "truncated"]))
@click.option("--bias-value", type=int, default=0)
@click.option("--bias-mass", type=float, default=0.8)
@click.option("--bias-low", type=int, default=0)
@click.option("--bias-high", type=int, default=127)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def gen(kind, count, upper, seed, label, bias_profile, bias_value, bias_mass,
        bias_low, bias_high, out) -> None:
    """Emit a local-generator sample as newline-delimited decimals."""
    source = _build_source(kind, label, seed, bias_profile, bias_value, bias_mass,
                           bias_low, bias_high)
    sample = draw_integers(source, count, upper)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_integers(out, sample)
    click.echo(f"wrote {len(sample)} values in [0, {upper}] to {out}")


# ---------------------------------------------------------------------------
# battery
# ---------------------------------------------------------------------------


def _sample_for_source(spec: dict, bit_width: int, default_count: int,
                       strict_parse: bool) -> tuple[IntegerSample, dict]:
    """Resolve one source spec into a sample; returns (sample, diagnostics)."""
    kind = spec.get("kind")
    label = spec.get("label") or kind
    params = dict(spec.get("params") or {})
    upper = int(params.get("max", 2**bit_width - 1))
    if kind in _GENERATING_KINDS:
        source = SampleSource(kind=kind, label=label, params=params)
        count = int(params.get("count", default_count))
        return draw_integers(source, count, upper), {}
    if kind == "file_transcript":
        path = Path(params["path"])
        source = SampleSource(kind=kind, label=label, params={"path": str(path)})
        if path.suffix == ".jsonl":
            transcript = load_transcript(path)
            values, dropped = extract_integers(transcript.all_text(), upper,
                                               strict=strict_parse)
            if not values:
                raise ValueError(f"{path}: transcript contains no usable values")
            sample = IntegerSample(np.array(values, dtype=np.int64), upper, source=source)
            return sample, {"dropped": dropped, "kept": len(values)}
        sample, diagnostics = ingest_transcript(path, upper, strict=strict_parse,
                                                source=source)
        return sample, diagnostics
    raise ValueError(f"source kind {kind!r} is not usable in the battery command")


def _score_source(spec: dict, config: BatteryConfig, default_count: int,
                  strict_parse: bool) -> dict:
    sample, diagnostics = _sample_for_source(spec, config.bit_width, default_count,
                                             strict_parse)
    bits = from_integers(sample, config.bit_width)
    results = run_battery(bits, sample, config)
    label = spec.get("label") or spec.get("kind")
    report = aggregate(results, label)
    return {
        "label": label,
        "report": report,
        "sample": sample,
        "diagnostics": diagnostics,
        "synthetic": spec.get("kind") == "biased",
    }


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="JSON with battery parameters and a 'sources' array.")
@click.option("--input", "inputs", multiple=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Transcript file(s); shorthand for file_transcript sources.")
@click.option("--count", type=int, default=10000, show_default=True,
              help="Values to draw from generating sources without an explicit count.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("reports"),
              show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "text", "csv"]), default="text",
              show_default=True, help="What to print on stdout.")
@click.option("--strict-parse", is_flag=True,
              help="Require transcripts to be JSON arrays instead of lenient digit runs.")
def battery(config_path, inputs, count, out, fmt, strict_parse) -> None:
    """Run the nine-test battery over one or more sample sources."""
    config = BatteryConfig()
    source_specs: list[dict] = []
    config_snapshot: dict = {}
    if config_path is not None:
        text = config_path.read_text(encoding="utf-8")
        config = BatteryConfig.from_json(text)
        data = json.loads(text)
        config_snapshot = data
        source_specs.extend(data.get("sources", []))
    for path in inputs:
        source_specs.append({
            "kind": "file_transcript",
            "label": path.stem,
            "params": {"path": str(path)},
        })
    if not source_specs:
        raise click.UsageError("no sources: provide --config with a 'sources' array or --input files")

    out.mkdir(parents=True, exist_ok=True)
    outcomes: list[dict] = []
    failures: list[tuple[str, str]] = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=min(4, len(source_specs))) as pool:
        futures = [pool.submit(_score_source, spec, config, count, strict_parse)
                   for spec in source_specs]
        for spec, future in zip(source_specs, futures):
            label = spec.get("label") or str(spec.get("kind"))
            try:
                outcomes.append(future.result())
            except Exception as exc:
                failures.append((label, str(exc)))

    outputs: list[str] = []
    summary_rows = []
    for outcome in outcomes:
        label = outcome["label"]
        report = outcome["report"]
        doc = report_as_dict(report)
        doc["manifest"] = "manifest.json"
        doc["synthetic"] = outcome["synthetic"]
        doc["top_values"] = _top_values(outcome["sample"])
        doc["ingest_diagnostics"] = outcome["diagnostics"]
        report_name = f"{label}.report.json"
        hist_name = f"{label}.hist.csv"
        (out / report_name).write_text(_dumps(doc), encoding="utf-8")
        (out / hist_name).write_text(_histogram_csv(outcome["sample"]), encoding="utf-8")
        outputs.extend([report_name, hist_name])
        summary_rows.append(doc)

    reports = [o["report"] for o in outcomes]
    table = format_table(reports) if reports else "(no successful sources)"
    (out / "battery_table.txt").write_text(table + "\n", encoding="utf-8")
    outputs.append("battery_table.txt")
    combined = {
        "sources": summary_rows,
        "failures": [{"label": l, "error": e} for l, e in failures],
        "manifest": "manifest.json",
    }
    (out / "battery_summary.json").write_text(_dumps(combined), encoding="utf-8")
    outputs.append("battery_summary.json")

    input_files = [Path(s["params"]["path"]) for s in source_specs
                   if s.get("kind") == "file_transcript"]
    if config_path is not None:
        input_files.append(config_path)
    _write_manifest(out, "battery", {"battery": config.__dict__,
                                     "sources": source_specs,
                                     "strict_parse": strict_parse,
                                     "default_count": count},
                    input_files, outputs)

    if fmt == "json":
        click.echo(_dumps(combined), nl=False)
    elif fmt == "csv":
        click.echo("source,ok_pct,suspect_pct,ko_pct")
        for report in reports:
            click.echo(f"{report.source_label},{report.ok_pct:.2f},"
                       f"{report.suspect_pct:.2f},{report.ko_pct:.2f}")
    else:
        click.echo(table)
    for label, error in failures:
        click.echo(f"FAILED {label}: {error}", err=True)

    if failures and not outcomes:
        sys.exit(3)
    if failures:
        sys.exit(1)


# ---------------------------------------------------------------------------
# shuffle
# ---------------------------------------------------------------------------


def _parse_rounds(text: str) -> list[int]:
    try:
        rounds = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError:
        raise click.UsageError(f"bad --rounds list: {text!r}")
    if not rounds or rounds != sorted(rounds):
        raise click.UsageError("--rounds must be an ascending comma-separated list")
    return rounds


@main.command()
@click.option("--n", "n_cards", type=int, default=10, show_default=True)
@click.option("--rounds", default="128,256,512,786,1024,1280,1536,1792,2048",
              show_default=True, help="Ascending trial counts, one series row each.")
@click.option("--seeds", type=int, default=20, show_default=True,
              help="Oracle repetitions averaged per row.")
@click.option("--base-seed", type=int, default=0, show_default=True)
@click.option("--trials-file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Recorded orderings (JSON array-of-arrays or CSV rows).")
@click.option("--expected", type=int, default=None,
              help="Trials the file was supposed to contain (for the shortfall diagnostic).")
@click.option("--with-oracle", is_flag=True,
              help="Also emit the local-oracle series next to an ingested file's series.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("reports"),
              show_default=True)
def shuffle(n_cards, rounds, seeds, base_seed, trials_file, expected, with_oracle, out) -> None:
    """Shuffle-entropy convergence series from the local oracle or a trial file."""
    if n_cards < 3:
        raise click.UsageError(
            f"--n must be >= 3 (entropy uses log base N-1), got {n_cards}"
        )
    round_counts = _parse_rounds(rounds)
    out.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    inputs: list[Path] = []
    payload: dict = {"n": n_cards, "rounds": round_counts, "manifest": "manifest.json"}

    def oracle_series() -> list[dict]:
        per_seed: list[list[float]] = []
        for s in range(seeds):
            seed = base_seed + s
            series = convergence_sweep(
                n_cards, round_counts,
                lambda r, seed=seed: uniform_shuffle_oracle(n_cards, r, seed),
            )
            per_seed.append([h for _, h in series])
        rows = []
        for idx, rounds_count in enumerate(round_counts):
            values = [per_seed[s][idx] for s in range(seeds)]
            rows.append({
                "rounds": rounds_count,
                "h_mean": float(np.mean(values)),
                "h_per_seed": [round(h, 12) for h in values],
            })
        return rows

    if trials_file is None:
        payload["series"] = oracle_series()
        payload["source"] = f"uniform-oracle(seeds={seeds}, base={base_seed})"
    else:
        inputs.append(trials_file)
        trial_set, diagnostics = ingest_trials(trials_file, n_cards, expected=expected)
        usable = [r for r in round_counts if r <= len(trial_set)]
        if not usable:
            usable = [len(trial_set)]
        series = convergence_sweep(
            n_cards, usable,
            lambda r: PermutationTrialSet(n_cards, trial_set.trials[:r],
                                          source_label=trial_set.source_label),
        )
        payload["series"] = [{"rounds": r, "h": h} for r, h in series]
        payload["source"] = str(trials_file)
        payload["diagnostics"] = diagnostics.as_dict()
        (out / "shuffle_diagnostics.json").write_text(_dumps(diagnostics.as_dict()),
                                                      encoding="utf-8")
        outputs.append("shuffle_diagnostics.json")
        if with_oracle:
            payload["oracle_series"] = oracle_series()

    csv_lines = ["rounds,h"]
    for row in payload["series"]:
        h = row.get("h_mean", row.get("h"))
        csv_lines.append(f"{row['rounds']},{h:.12f}")
    (out / "shuffle_series.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    (out / "shuffle_series.json").write_text(_dumps(payload), encoding="utf-8")
    outputs.extend(["shuffle_series.csv", "shuffle_series.json"])
    _write_manifest(out, "shuffle", {"n": n_cards, "rounds": round_counts,
                                     "seeds": seeds, "base_seed": base_seed,
                                     "expected": expected}, inputs, outputs)
    click.echo("\n".join(csv_lines))


# ---------------------------------------------------------------------------
# passwords
# ---------------------------------------------------------------------------


@main.command()
@click.option("--input", "corpus_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--alphabet", default=DEFAULT_ALPHABET, show_default=False,
              help="Permitted character set (defaults to letters, digits, !@#$%^&*()-_).")
@click.option("--min-len", type=int, default=3, show_default=True,
              help="Minimum shared-substring length to report.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=Path("reports"),
              show_default=True)
def passwords(corpus_path, alphabet, min_len, out) -> None:
    """Character-frequency, repeat, and battery analysis of a password corpus."""
    from .bitstream import read_passwords_file

    lines = read_passwords_file(corpus_path)
    if not lines:
        raise click.UsageError(f"{corpus_path}: corpus is empty")
    corpus = PasswordCorpus(lines, alphabet=alphabet)
    frequency = char_frequency(corpus)
    repeats = repeated_substring_scan(corpus, min_len=min_len)
    bits = corpus_to_bits(corpus)
    results = run_battery(bits)
    report = aggregate(results, corpus_path.stem)

    doc = {
        "corpus": str(corpus_path),
        "passwords": len(corpus),
        "alphabet": corpus.alphabet,
        "alphabet_violations": corpus.violations,
        "frequency": frequency.as_dict(),
        "repeats": repeats.as_dict(),
        "battery": report_as_dict(report),
        "manifest": "manifest.json",
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "passwords_report.json").write_text(_dumps(doc), encoding="utf-8")
    _write_manifest(out, "passwords", {"alphabet": alphabet, "min_len": min_len},
                    [corpus_path], ["passwords_report.json"])
    click.echo(f"frequency p={frequency.p:.6g} [{frequency.verdict.label}], "
               f"repeats={len(repeats.repeats)}, duplicate_pairs={repeats.duplicate_pairs}, "
               f"battery OK={report.ok_pct:.1f}%")


# ---------------------------------------------------------------------------
# llm
# ---------------------------------------------------------------------------


@main.command()
@click.option("--base-url", required=True)
@click.option("--model", required=True)
@click.option("--mode", type=click.Choice(["integers", "shuffles", "tool"]),
              default="integers", show_default=True)
@click.option("--count", type=int, default=10000, show_default=True)
@click.option("--max", "upper", type=int, default=255, show_default=True)
@click.option("--n", "n_cards", type=int, default=10, show_default=True)
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--tool-kind", type=click.Choice(_GENERATING_KINDS), default="crypto_below",
              show_default=True, help="Generator serving tool calls in tool mode.")
@click.option("--tool-seed", type=int, default=0, show_default=True)
@click.option("--fresh", is_flag=True, help="Send each request without prior history.")
@click.option("--no-system-prompt", is_flag=True)
@click.option("--batch-size", type=int, default=500, show_default=True)
@click.option("--min-interval", type=float, default=1.0, show_default=True,
              help="Minimum seconds between requests.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def llm(base_url, model, mode, count, upper, n_cards, trials, tool_kind, tool_seed,
        fresh, no_system_prompt, batch_size, min_interval, out) -> None:
    """Collect a transcript from a chat-completion endpoint for offline scoring."""
    config = PromptConfig(
        endpoint=Endpoint(base_url=base_url, model=model),
        system_prompt=None if no_system_prompt else SYSTEM_PROMPT,
        session_mode="fresh" if fresh else "continued",
        tool_mode="rng_tool" if mode == "tool" else "none",
        batch_size=batch_size,
    )
    try:
        client = ChatClient(config.endpoint, min_request_interval=min_interval)
    except MissingCredentialsError as exc:
        raise click.UsageError(str(exc))
    try:
        if mode == "integers":
            transcript = request_integers(config, count, upper, client=client)
        elif mode == "shuffles":
            transcript = request_shuffles(config, n_cards, trials, client=client)
        else:
            tool_source = SampleSource(kind=tool_kind, label=f"tool:{tool_kind}",
                                       params={"seed": tool_seed})
            transcript = run_tool_loop(config, count, upper, tool_source, client=client)
    finally:
        client.close()
    out.parent.mkdir(parents=True, exist_ok=True)
    transcript.save(out)
    flags = f" flags={transcript.flags}" if transcript.flags else ""
    click.echo(f"stored {len(transcript.exchanges)} exchanges to {out}{flags}")


if __name__ == "__main__":
    main()
