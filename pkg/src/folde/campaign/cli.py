"""Command-line interface: simulation benchmarks, reports, artifacts, live campaigns."""

from __future__ import annotations

import json
import os
from pathlib import Path

import click

from ..core import save_dataset, save_embeddings, save_logprobs
from ..sim import (
    POLICY_NAMES,
    SimConfig,
    SynthConfig,
    aggregate_results,
    read_results,
    run_benchmark,
    synth_landscape,
    write_results,
)
from .state import (
    CampaignConfig,
    CampaignError,
    CampaignState,
    CampaignStore,
    campaign_metrics,
    propose_batch,
    record_measurements,
    summarize,
)

DATA_DIR_ENV = "FOLDE_DATA_DIR"

ABLATION_POLICIES = (
    "folde",
    "folde_no_warmstart",
    "folde_no_cl",
    "ucb_topn",
    "mse_net",
    "random_forest",
    "zero_shot",
    "random",
)


def read_config_file(path) -> dict:
    """key = value lines; '#' comments; values parsed as JSON when possible."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"config line without '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _resolve_data_dir(data_dir: str | None) -> Path:
    resolved = data_dir or os.environ.get(DATA_DIR_ENV) or "./campaigns"
    return Path(resolved)


@click.group()
def main():
    """Active-learning-assisted directed evolution toolkit."""


def _landscape_options(fn):
    options = [
        click.option("--length", type=int, default=32, show_default=True),
        click.option("--n-variants", type=int, default=500, show_default=True),
        click.option("--n-doubles", type=int, default=0, show_default=True),
        click.option("--epistasis", type=float, default=0.0, show_default=True),
        click.option("--rho-target", type=float, default=0.48, show_default=True),
        click.option("--embed-dim", type=int, default=128, show_default=True),
        click.option("--landscape-seed", type=int, default=0, show_default=True),
    ]
    for opt in reversed(options):
        fn = opt(fn)
    return fn


def _build_landscape(length, n_variants, n_doubles, epistasis, rho_target, embed_dim,
                     landscape_seed):
    return synth_landscape(
        SynthConfig(
            length=length,
            n_variants=n_variants,
            n_doubles=n_doubles,
            epistasis_strength=epistasis,
            naturalness_rho_target=rho_target,
            embed_dim=embed_dim,
            seed=landscape_seed,
        )
    )


def _run_and_write(landscape, config, policies, workers, out):
    rows = run_benchmark(landscape, config, policies=policies, workers=workers)
    write_results(rows, out)
    click.echo(f"wrote {len(rows)} rows to {out}")


def _sim_config(overrides, **kw):
    merged = dict(kw)
    for key, value in overrides.items():
        if key in ("alpha_schedule",) and isinstance(value, list):
            merged[key] = tuple(float(v) for v in value)
        else:
            merged[key] = value
    return SimConfig(**merged)


@main.command()
@_landscape_options
@click.option("--policies", default="folde,random_forest,zero_shot,random",
              show_default=True, help="comma-separated policy names")
@click.option("--rounds", type=int, default=3, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--replicates", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--alpha", "alpha_schedule", type=float, multiple=True,
              help="per-round alpha from round 2 on (repeatable); default 6 then 100")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key=value file overriding simulation settings")
@click.option("--out", type=click.Path(), default="results.tsv", show_default=True)
def simulate(length, n_variants, n_doubles, epistasis, rho_target, embed_dim,
             landscape_seed, policies, rounds, batch_size, replicates, seed,
             alpha_schedule, workers, config_path, out):
    """Run the benchmark harness on a synthetic landscape."""
    names = tuple(p.strip() for p in policies.split(",") if p.strip())
    for name in names:
        if name not in POLICY_NAMES:
            raise click.ClickException(
                f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}"
            )
    overrides = read_config_file(config_path) if config_path else {}
    config = _sim_config(
        overrides,
        rounds=rounds,
        batch_size=batch_size,
        replicates=replicates,
        seed=seed,
        alpha_schedule=tuple(alpha_schedule) or (6.0, 100.0),
    )
    landscape = _build_landscape(length, n_variants, n_doubles, epistasis,
                                 rho_target, embed_dim, landscape_seed)
    _run_and_write(landscape, config, names, workers, out)


@main.command()
@_landscape_options
@click.option("--rounds", type=int, default=3, show_default=True)
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--replicates", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(), default="ablation.tsv", show_default=True)
def ablate(length, n_variants, n_doubles, epistasis, rho_target, embed_dim,
           landscape_seed, rounds, batch_size, replicates, seed, workers, out):
    """Sweep the full policy set, ablations included."""
    config = SimConfig(rounds=rounds, batch_size=batch_size, replicates=replicates,
                       seed=seed)
    landscape = _build_landscape(length, n_variants, n_doubles, epistasis,
                                 rho_target, embed_dim, landscape_seed)
    _run_and_write(landscape, config, ABLATION_POLICIES, workers, out)


@main.command()
@click.argument("results", type=click.Path(exists=True))
@click.option("--series-out", type=click.Path(), default=None,
              help="also write plot-ready per-policy series to this TSV")
def report(results, series_out):
    """Aggregate a results file into per-policy, per-round tables."""
    rows = read_results(results)
    agg = aggregate_results(rows)
    click.echo(f"{'policy':<20}{'round':>6}{'reps':>6}{'cum hits':>12}{'sem':>8}"
               f"{'P(top1%)':>10}{'rho':>8}{'loci':>7}{'new':>6}")
    for a in agg:
        rho = "NA" if a["mean_heldout_spearman"] is None else f"{a['mean_heldout_spearman']:.3f}"
        click.echo(
            f"{a['policy']:<20}{a['round']:>6}{a['replicates']:>6}"
            f"{a['mean_cum_hits']:>12.2f}{a['sem_cum_hits']:>8.2f}"
            f"{a['top1_probability']:>10.2f}{rho:>8}"
            f"{a['mean_unique_loci']:>7.1f}{a['mean_new_loci']:>6.1f}"
        )
    if series_out:
        header = ("policy\tround\treplicates\tmean_cum_hits\tsem_cum_hits\t"
                  "top1_probability\tmean_heldout_spearman\tmean_unique_loci\tmean_new_loci")
        lines = [header]
        for a in agg:
            rho = "NA" if a["mean_heldout_spearman"] is None else repr(a["mean_heldout_spearman"])
            lines.append(
                f"{a['policy']}\t{a['round']}\t{a['replicates']}\t"
                f"{a['mean_cum_hits']!r}\t{a['sem_cum_hits']!r}\t"
                f"{a['top1_probability']!r}\t{rho}\t"
                f"{a['mean_unique_loci']!r}\t{a['mean_new_loci']!r}"
            )
        Path(series_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"wrote series to {series_out}")


@main.command()
@_landscape_options
@click.option("--out", type=click.Path(), default="artifacts", show_default=True)
def synth(length, n_variants, n_doubles, epistasis, rho_target, embed_dim,
          landscape_seed, out):
    """Write a synthetic artifact set (dataset, embeddings, log-probs) to a directory."""
    landscape = _build_landscape(length, n_variants, n_doubles, epistasis,
                                 rho_target, embed_dim, landscape_seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_dataset(landscape.dataset, out_dir / "dataset.tsv")
    save_embeddings(landscape.embeddings, out_dir / "embeddings.bin")
    save_logprobs(landscape.logprobs, out_dir / "logprobs.tsv")
    meta = {
        "reference": landscape.dataset.reference_sequence,
        "achieved_rho": landscape.meta.achieved_rho,
        "config": {
            "length": length, "n_variants": n_variants, "n_doubles": n_doubles,
            "epistasis_strength": epistasis, "naturalness_rho_target": rho_target,
            "embed_dim": embed_dim, "seed": landscape_seed,
        },
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    click.echo(f"wrote dataset.tsv, embeddings.bin, logprobs.tsv, meta.json to {out_dir}")


@main.group()
def campaign():
    """Live campaign operations (server and offline equivalents)."""


@campaign.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", default=None, help=f"default: ${DATA_DIR_ENV} or ./campaigns")
def serve(port, host, data_dir):
    """Serve the campaign HTTP API."""
    import uvicorn

    from .service import create_app

    app = create_app(_resolve_data_dir(data_dir))
    uvicorn.run(app, host=host, port=port)


@campaign.command()
@click.option("--campaign-id", required=True)
@click.option("--reference", default=None, help="amino-acid sequence")
@click.option("--artifacts", "artifacts_dir", type=click.Path(exists=True), default=None,
              help="directory from `folde synth` (reads meta.json for the reference)")
@click.option("--embeddings", "embeddings_path", type=click.Path(), default=None)
@click.option("--logprobs", "logprobs_path", type=click.Path(), default=None)
@click.option("--dataset", "dataset_path", type=click.Path(), default=None,
              help="optional ground-truth dataset for replay metrics")
@click.option("--batch-size", type=int, default=16, show_default=True)
@click.option("--rounds", type=int, default=3, show_default=True)
@click.option("--per-locus-cap", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--data-dir", default=None)
def create(campaign_id, reference, artifacts_dir, embeddings_path, logprobs_path,
           dataset_path, batch_size, rounds, per_locus_cap, seed, data_dir):
    """Create a campaign state file."""
    if artifacts_dir:
        art = Path(artifacts_dir)
        meta = json.loads((art / "meta.json").read_text(encoding="utf-8"))
        reference = reference or meta["reference"]
        embeddings_path = embeddings_path or str(art / "embeddings.bin")
        logprobs_path = logprobs_path or str(art / "logprobs.tsv")
        if dataset_path is None and (art / "dataset.tsv").exists():
            dataset_path = str(art / "dataset.tsv")
    if not (reference and embeddings_path and logprobs_path):
        raise click.ClickException(
            "need --reference, --embeddings and --logprobs (or --artifacts)"
        )
    store = CampaignStore(_resolve_data_dir(data_dir))
    try:
        state = CampaignState(
            campaign_id=campaign_id,
            reference=reference,
            embeddings_path=str(embeddings_path),
            logprobs_path=str(logprobs_path),
            dataset_path=dataset_path,
            config=CampaignConfig(
                batch_size=batch_size, rounds=rounds, per_locus_cap=per_locus_cap,
                seed=seed,
            ),
        )
        store.create(state)
    except (CampaignError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(summarize(state), indent=2))


@campaign.command()
@click.option("--campaign-id", required=True)
@click.option("--alpha", type=float, default=None, help="override this round's alpha")
@click.option("--data-dir", default=None)
def propose(campaign_id, alpha, data_dir):
    """Propose the next batch (offline equivalent of POST /propose)."""
    store = CampaignStore(_resolve_data_dir(data_dir))
    try:
        state = propose_batch(store, campaign_id, alpha=alpha)
    except (CampaignError, KeyError) as exc:
        raise click.ClickException(str(exc))
    rnd = state.rounds[-1]
    click.echo(f"round {rnd.index} proposal ({len(rnd.proposed)} variants):")
    for text in rnd.proposed:
        s = rnd.scores.get(text, {})
        consensus = s.get("consensus")
        line = f"  {text:<16} naturalness={s.get('naturalness', float('nan')):.4f}"
        if consensus is not None:
            line += f" consensus={consensus:.4f} ucb={s.get('ucb'):.4f}"
        click.echo(line)


@campaign.command()
@click.option("--campaign-id", required=True)
@click.option("--measurement", "entries", multiple=True,
              help="VARIANT=ACTIVITY (repeatable)")
@click.option("--file", "file_path", type=click.Path(exists=True), default=None,
              help="TSV of variant<TAB>activity rows")
@click.option("--data-dir", default=None)
def record(campaign_id, entries, file_path, data_dir):
    """Record measured activities for the pending batch."""
    pairs: list[tuple[str, float]] = []
    for entry in entries:
        if "=" not in entry:
            raise click.ClickException(f"expected VARIANT=ACTIVITY, got {entry!r}")
        variant, value = entry.split("=", 1)
        pairs.append((variant.strip(), float(value)))
    if file_path:
        for raw in Path(file_path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#") or line.startswith("mutant\t"):
                continue
            variant, value = line.split("\t")[:2]
            pairs.append((variant, float(value)))
    if not pairs:
        raise click.ClickException("no measurements supplied")
    store = CampaignStore(_resolve_data_dir(data_dir))
    try:
        state = record_measurements(store, campaign_id, pairs)
    except (CampaignError, KeyError) as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(summarize(state), indent=2))


@campaign.command()
@click.option("--campaign-id", required=True)
@click.option("--data-dir", default=None)
def show(campaign_id, data_dir):
    """Print a campaign's full state."""
    store = CampaignStore(_resolve_data_dir(data_dir))
    try:
        state = store.load(campaign_id)
    except KeyError as exc:
        raise click.ClickException(str(exc))
    from .state import state_to_json

    click.echo(json.dumps(state_to_json(state), indent=2, sort_keys=True))


@campaign.command()
@click.option("--campaign-id", required=True)
@click.option("--data-dir", default=None)
def metrics(campaign_id, data_dir):
    """Print per-round campaign metrics."""
    store = CampaignStore(_resolve_data_dir(data_dir))
    try:
        state = store.load(campaign_id)
        click.echo(json.dumps(campaign_metrics(state), indent=2))
    except (CampaignError, KeyError) as exc:
        raise click.ClickException(str(exc))


if __name__ == "__main__":
    main()
