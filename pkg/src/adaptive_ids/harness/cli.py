"""Command-line interface: training, evaluation, simulation, and live nodes."""

from __future__ import annotations

import sys
import threading
from pathlib import Path

import click

from .. import classifier as clf
from ..kdd.public import PUBLIC_FILES, fetch
from ..kdd.records import load_kdd_file, write_kdd_file
from ..kdd.sampling import stratified_sample
from ..kdd.synthetic import PROFILES, synth_records
from ..mlp import LmConfig, RpropConfig
from ..nodes.central import Central, OFFICER_POLICIES
from ..svm import SmoConfig
from .metrics import emit_report, evaluate_report, render_text
from .scenario import load_scenario, run_scenario


@click.group()
def main() -> None:
    """Adaptive intrusion detection over KDD99-style connection records."""


def _spec_options(fn):
    options = [
        click.option("--kind", type=click.Choice(["svm", "mlp"]), default="svm", show_default=True),
        click.option("--trainer", type=click.Choice(["rprop", "lm"]), default="rprop", show_default=True),
        click.option("--hidden-grid", default="15,25,40", show_default=True,
                     help="Comma-separated hidden sizes searched for the MLP."),
        click.option("--svm-c", type=float, default=1.0, show_default=True),
        click.option("--svm-kernel", type=click.Choice(["rbf", "linear"]), default="rbf", show_default=True),
        click.option("--svm-gamma", type=float, default=None, help="Default: 1/encoded width."),
        click.option("--max-epochs", type=int, default=200, show_default=True),
        click.option("--target-mse", type=float, default=1e-3, show_default=True),
        click.option("--validation-fraction", type=float, default=0.2, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_spec(kind, trainer, hidden_grid, svm_c, svm_kernel, svm_gamma,
                max_epochs, target_mse, validation_fraction, seed) -> clf.TrainSpec:
    grid = tuple(int(s) for s in str(hidden_grid).split(",") if s.strip())
    return clf.TrainSpec(
        kind=kind,
        hidden_size_grid=grid,
        trainer=trainer,
        rprop=RpropConfig(max_epochs=max_epochs, target_mse=target_mse),
        lm=LmConfig(max_epochs=max_epochs, target_mse=target_mse),
        smo=SmoConfig(C=svm_c, seed=seed),
        svm_kernel=svm_kernel,
        svm_gamma=svm_gamma,
        validation_fraction=validation_fraction,
        seed=seed,
    )


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
@click.option("--sample", type=int, default=None, help="Stratified subsample size.")
@_spec_options
def train(data_path: Path, out_path: Path, sample: int | None, **spec_kwargs) -> None:
    """Train a classifier artifact from a labeled KDD99 CSV file."""
    spec = _build_spec(**spec_kwargs)
    records = load_kdd_file(data_path)
    if sample is not None:
        records = stratified_sample(records, sample, spec.seed)
    artifact = clf.train(spec, records)
    clf.save_artifact(artifact, out_path)
    manifest = artifact.manifest
    click.echo(f"trained {artifact.kind} artifact version {artifact.version}")
    click.echo(f"records: {manifest.record_count}, corpus digest: {manifest.corpus_digest[:16]}…")
    if manifest.chosen_hidden_size is not None:
        click.echo(f"chosen hidden size: {manifest.chosen_hidden_size}")
    if manifest.support_vector_count is not None:
        click.echo(f"support vectors: {manifest.support_vector_count}")
    click.echo(f"wrote {out_path}")


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--sample", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=None,
              help="Write the aligned-text report here.")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None,
              help="Write the CSV report here.")
def eval_command(model_path: Path, data_path: Path, sample: int | None, seed: int,
                 report_path: Path | None, csv_path: Path | None) -> None:
    """Evaluate an artifact against a labeled stream file."""
    artifact = clf.load_artifact(model_path)
    records = load_kdd_file(data_path)
    if sample is not None:
        records = stratified_sample(records, sample, seed)
    report = evaluate_report(artifact, records)
    click.echo(render_text(report), nl=False)
    if report_path is not None:
        emit_report(report, report_path, "text")
        click.echo(f"wrote {report_path}")
    if csv_path is not None:
        emit_report(report, csv_path, "csv")
        click.echo(f"wrote {csv_path}")


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, path_type=Path))
@click.option("--workdir", type=click.Path(path_type=Path), default=None,
              help="Override the scenario's working directory.")
def simulate(scenario_file: Path, workdir: Path | None) -> None:
    """Run a scenario end to end; exit code 0 iff all in-run invariants held."""
    config = load_scenario(scenario_file)
    if workdir is not None:
        config.workdir = workdir
    result = run_scenario(config)
    click.echo("=== before adaptation ===")
    click.echo(render_text(result.before), nl=False)
    click.echo("=== after adaptation ===")
    click.echo(render_text(result.after), nl=False)
    click.echo(f"retrains: {result.retrain_count}, final version: {result.central.base_version}")
    emit_report(result.before, config.workdir / "before.txt", "text")
    emit_report(result.before, config.workdir / "before.csv", "csv")
    emit_report(result.after, config.workdir / "after.txt", "text")
    emit_report(result.after, config.workdir / "after.csv", "csv")
    click.echo(f"trace: {result.trace_path}")
    if result.violations:
        for violation in result.violations:
            click.echo(f"INVARIANT VIOLATED: {violation}", err=True)
        sys.exit(1)


@main.group()
def central() -> None:
    """Central-module commands."""


@central.command("serve")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True, path_type=Path),
              help="Training corpus for the base classifier.")
@click.option("--sample", type=int, default=None)
@click.option("--http-port", type=int, default=8420, show_default=True)
@click.option("--tcp-port", type=int, default=8421, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--officer", type=click.Choice(OFFICER_POLICIES), default="manual", show_default=True)
@click.option("--retrain-threshold", "-k", type=int, default=8, show_default=True)
@click.option("--workdir", type=click.Path(path_type=Path), default=Path("runs/central"), show_default=True)
@_spec_options
def central_serve(data_path: Path, sample: int | None, http_port: int, tcp_port: int,
                  host: str, officer: str, retrain_threshold: int, workdir: Path,
                  **spec_kwargs) -> None:
    """Train the base model, then serve the TCP node port and the HTTP API."""
    import uvicorn

    from ..nodes.api import create_app
    from ..nodes.tcp import CentralServer

    spec = _build_spec(**spec_kwargs)
    records = load_kdd_file(data_path)
    if sample is not None:
        records = stratified_sample(records, sample, spec.seed)
    workdir.mkdir(parents=True, exist_ok=True)
    central_node = Central(
        spec,
        records,
        officer_policy=officer,
        retrain_threshold=retrain_threshold,
        log_path=workdir / "central.log",
    )
    click.echo("training base classifier…")
    update = central_node.train_base()
    click.echo(f"base model version {update.version} ready")

    lock = threading.RLock()
    server = CentralServer(central_node, host=host, port=tcp_port, lock=lock)
    server.start()
    click.echo(f"node port: {server.address[0]}:{server.address[1]}")
    app = create_app(central_node, lock=lock, on_model_update=server.broadcast)
    click.echo(f"console API: http://{host}:{http_port}")
    uvicorn.run(app, host=host, port=http_port, log_level="warning")


@main.group()
def monitor() -> None:
    """Net-LAN monitor commands."""


@monitor.command("run")
@click.option("--central", "central_addr", required=True, help="host:port of the central node port.")
@click.option("--node-id", required=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--linger", type=float, default=2.0, show_default=True,
              help="Seconds to keep listening for model updates after the stream ends.")
def monitor_run(central_addr: str, node_id: str, input_path: Path, linger: float) -> None:
    """Stream records from a file through a monitor against a live central."""
    import time

    from ..nodes.tcp import MonitorClient

    host, port = central_addr.rsplit(":", 1)
    client = MonitorClient((host, int(port)), node_id)
    client.wait_for_version(1, timeout=30)
    sent = client.process_records(load_kdd_file(input_path))
    click.echo(f"{node_id}: {client.monitor.records_seen} records, {sent} alarms")
    time.sleep(linger)
    client.close()


@main.group()
def honeypot() -> None:
    """Honeypot monitor commands."""


@honeypot.command("run")
@click.option("--central", "central_addr", required=True)
@click.option("--node-id", required=True)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--p-detect", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--linger", type=float, default=2.0, show_default=True)
def honeypot_run(central_addr: str, node_id: str, input_path: Path,
                 p_detect: float, seed: int, linger: float) -> None:
    """Replay honeypot-routed records against a live central."""
    import time

    from ..nodes.tcp import HoneypotClient

    host, port = central_addr.rsplit(":", 1)
    client = HoneypotClient((host, int(port)), node_id, p_detect, seed=seed)
    sent = client.process_records(load_kdd_file(input_path))
    click.echo(f"{node_id}: {client.monitor.records_seen} records, {sent} alarms")
    time.sleep(linger)
    client.close()


@main.group()
def dataset() -> None:
    """Dataset utilities."""


@dataset.command("sample")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--output", "output_path", required=True, type=click.Path(path_type=Path))
@click.option("-n", "size", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
def dataset_sample(input_path: Path, output_path: Path, size: int, seed: int) -> None:
    """Write a stratified subsample of a KDD99 CSV file."""
    records = load_kdd_file(input_path)
    sampled = stratified_sample(records, size, seed)
    write_kdd_file(sampled, output_path)
    click.echo(f"wrote {len(sampled)} records to {output_path}")


@dataset.command("synth")
@click.option("--output", "output_path", required=True, type=click.Path(path_type=Path))
@click.option("--profile", "profiles", multiple=True, required=True,
              type=(str, int), help="Profile name and count, repeatable. "
              f"Profiles: {', '.join(PROFILES)}.")
@click.option("--seed", type=int, default=0, show_default=True)
def dataset_synth(output_path: Path, profiles: tuple[tuple[str, int], ...], seed: int) -> None:
    """Generate a synthetic desk-scale corpus."""
    records = synth_records(list(profiles), seed)
    write_kdd_file(records, output_path)
    click.echo(f"wrote {len(records)} records to {output_path}")


@dataset.command("fetch")
@click.argument("name", type=click.Choice(sorted(PUBLIC_FILES)))
@click.option("--dir", "directory", type=click.Path(path_type=Path), default=None,
              help="Target directory (default: $ADAPTIVE_IDS_DATA or ./data).")
def dataset_fetch(name: str, directory: Path | None) -> None:
    """Download one of the public KDD99 files (needs network access)."""
    try:
        path = fetch(name, directory)
    except OSError as exc:
        raise click.ClickException(
            f"download failed ({exc}); place {PUBLIC_FILES[name]['filename']} "
            "into the data directory by hand instead"
        ) from exc
    click.echo(f"ready: {path}")


if __name__ == "__main__":
    main()
