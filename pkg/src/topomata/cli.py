"""Command-line pipeline: simulate, build complexes, compute barcodes,
entropy chronograms, the entropy automaton, and agent Chu spaces.

Every stage is also a standalone subcommand; `pipeline` chains them and
writes the same bytes the individual commands would. Exit codes: 0 success,
1 usage, 2 data error (stage name in the message), 3 internal error.
"""
from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import automaton as automaton_mod
from . import entropy as entropy_mod
from .chu import (
    ChuSpace,
    actions_from_generators,
    chu_to_csv_lines,
    constrain,
    full_chu,
    hasse,
    hasse_to_dot,
)
from .errors import NoGenerators, ParseError, ToolError
from .filtration import ASCENDING, DESCENDING, build_filtration
from .graph import (
    ObservationSeries,
    load_edge_list,
    load_observations,
    write_observation_dir,
    write_observations_json,
)
from .homology import (
    Barcode,
    format_barcode_text,
    persistent_homology,
    read_barcode_json,
    write_barcode_json,
)
from .immune import SimConfig
from .immune import run as run_simulation


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(name: str):
    def decorate(fn):
        def wrapper(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except ToolError as e:
                raise StageFailure(name, e) from e

        wrapper.__name__ = fn.__name__
        wrapper.__doc__ = fn.__doc__
        return wrapper

    return decorate


def _parse_log_base(text: str) -> float:
    if text == "e":
        return math.e
    try:
        base = float(text)
    except ValueError:
        raise click.UsageError(f"--log-base must be 'e' or a number, got {text!r}")
    if base <= 0 or base == 1.0:
        raise click.UsageError("--log-base must be positive and != 1")
    return base


def _load_json(path: str, what: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{what} file {path}: invalid JSON ({e})") from None


order_option = click.option(
    "--order",
    type=click.Choice([DESCENDING, ASCENDING]),
    default=DESCENDING,
    show_default=True,
    help="Weight ranking order for the filtration.",
)


@click.group()
def cli() -> None:
    """Topological model extraction for evolving weighted networks."""


# --- simulate ---------------------------------------------------------------


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="SimConfig file (JSON or key=value lines).")
@click.option("--repertoire", type=int, default=None, help="Number of antibodies.")
@click.option("--ticks", type=int, default=None)
@click.option("--injections", default=None, help="Comma-separated injection ticks.")
@click.option("--seed", type=int, default=None)
@click.option("--stride", type=int, default=None, help="Sampling stride in ticks.")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None,
              help="Write the series as one JSON file.")
@click.option("--dir", "dir_out", type=click.Path(file_okay=False), default=None,
              help="Write the series as a directory of obs_<tick>.csv files.")
@_stage("simulate")
def simulate(config_path, repertoire, ticks, injections, seed, stride, json_out, dir_out):
    """Run the idiotypic-network simulator and write an observation series."""
    cfg = SimConfig.from_file(config_path) if config_path else SimConfig()
    overrides = {}
    if repertoire is not None:
        overrides["repertoire"] = repertoire
    if ticks is not None:
        overrides["ticks"] = ticks
    if injections is not None:
        overrides["injections"] = injections
    if seed is not None:
        overrides["seed"] = seed
    if stride is not None:
        overrides["stride"] = stride
    if overrides:
        merged = {**_config_as_dict(cfg), **overrides}
        cfg = SimConfig.from_mapping(merged, source="command line")
    series = run_simulation(cfg)
    if json_out is None and dir_out is None:
        json_out = "observations.json"
    if json_out:
        write_observations_json(series, json_out)
        click.echo(f"wrote {len(series)} observations to {json_out}")
    if dir_out:
        write_observation_dir(series, dir_out)
        click.echo(f"wrote {len(series)} observations to {dir_out}/")


def _config_as_dict(cfg: SimConfig) -> dict:
    return {
        "repertoire": cfg.repertoire,
        "bit_width": cfg.bit_width,
        "ticks": cfg.ticks,
        "injections": list(cfg.injections),
        "seed": cfg.seed,
        "stride": cfg.stride,
        "s_threshold": cfg.s_threshold,
        "rho": cfg.rho,
        "v_max": cfg.v_max,
        "antigen": cfg.antigen,
        "antigen_dose": cfg.antigen_dose,
        "antigen_duration": cfg.antigen_duration,
        "volume_floor": cfg.volume_floor,
        "update": cfg.update,
        "cluster_size": cfg.cluster_size,
    }


# --- complex ----------------------------------------------------------------


@cli.command("complex")
@click.argument("graph_file", type=click.Path(exists=True, dir_okay=False))
@order_option
@click.option("--max-dim", type=int, default=2, show_default=True,
              help="Top simplex dimension to build.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Output file (default: stdout).")
@_stage("complex")
def complex_cmd(graph_file, order, max_dim, out):
    """Dump the clique filtration of a graph, one `index;vertices` line each."""
    g = load_edge_list(graph_file)
    c = build_filtration(g, order=order, max_dim=max_dim)
    text = "\n".join(c.dump_lines()) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


# --- homology ---------------------------------------------------------------


def _barcode_of_graph(g, order: str, max_dim: int) -> Barcode:
    c = build_filtration(g, order=order, max_dim=max_dim + 1)
    return persistent_homology(c, max_dim=max_dim)


def _barcode_task(args) -> tuple[int, Barcode]:
    tick, g, order, max_dim = args
    return tick, _barcode_of_graph(g, order, max_dim)


def barcodes_for_series(
    series: ObservationSeries, order: str, max_dim: int, jobs: int = 1
) -> list[tuple[int, Barcode]]:
    """Per-observation barcodes, deterministically merged in tick order."""
    tasks = [(t, g, order, max_dim) for t, g in series]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_barcode_task, tasks))
    else:
        results = [_barcode_task(t) for t in tasks]
    results.sort(key=lambda p: p[0])
    return results


@cli.command()
@click.argument("graph_file", type=click.Path(exists=True, dir_okay=False))
@order_option
@click.option("--max-dim", type=int, default=1, show_default=True,
              help="Highest homology dimension reported; simplices up to one "
                   "dimension higher are built.")
@click.option("-o", "--out", type=click.Path(dir_okay=False), default=None,
              help="Barcode JSON output (default: stdout).")
@click.option("--text", is_flag=True, help="Also print the plain-text barcode.")
@_stage("homology")
def homology(graph_file, order, max_dim, out, text):
    """Compute the persistence barcode of one graph."""
    g = load_edge_list(graph_file)
    b = _barcode_of_graph(g, order, max_dim)
    if out:
        write_barcode_json(b, out)
    else:
        from .homology import barcode_to_dict

        click.echo(json.dumps(barcode_to_dict(b), indent=1))
    if text:
        click.echo(format_barcode_text(b))


# --- entropy ----------------------------------------------------------------


@cli.command()
@click.argument("series_path", type=click.Path(exists=True))
@order_option
@click.option("--max-dim", type=int, default=1, show_default=True)
@click.option("--log-base", default="e", show_default=True,
              help="Logarithm base for the entropy ('e' or a number).")
@click.option("--real-lengths", is_flag=True,
              help="Measure bar lengths in ladder weights instead of indices "
                   "(ascending filtrations only).")
@click.option("--empty", type=click.Choice(["error", "zero"]), default="zero",
              show_default=True,
              help="What an observation with no bars contributes.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("-o", "--out", type=click.Path(dir_okay=False), default="entropy.csv",
              show_default=True)
@click.option("--per-dim-out", type=click.Path(dir_okay=False), default=None,
              help="Also write per-dimension entropy diagnostics CSV.")
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None,
              help="Emit a gnuplot script rendering the chronogram.")
@_stage("entropy")
def entropy(series_path, order, max_dim, log_base, real_lengths, empty, jobs, out,
            per_dim_out, plot_script):
    """Entropy chronogram of an observation series (directory or JSON)."""
    base = _parse_log_base(log_base)
    series = load_observations(series_path)
    barcodes = barcodes_for_series(series, order, max_dim, jobs)
    lengths = entropy_mod.WEIGHT_LENGTHS if real_lengths else entropy_mod.INDEX_LENGTHS
    s = entropy_mod.chronogram(barcodes, base=base, lengths=lengths, empty=empty)
    entropy_mod.write_series_csv(s, out)
    click.echo(f"wrote {len(s.points)} entropy points to {out}")
    if per_dim_out:
        Path(per_dim_out).write_text(
            "\n".join(entropy_mod.per_dim_csv_lines(s)) + "\n", encoding="utf-8"
        )
    if plot_script:
        Path(plot_script).write_text(entropy_mod.plot_script(out), encoding="utf-8")


# --- pea --------------------------------------------------------------------


@cli.command()
@click.argument("entropy_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--eps", type=float, default=None,
              help="Plateau slope tolerance (default: 0.05 * max H).")
@click.option("--window", type=int, default=automaton_mod.DEFAULT_WINDOW,
              show_default=True, help="Minimum plateau length in samples.")
@click.option("--prominence", type=float, default=None,
              help="Peak prominence threshold (default: 0.25 * max H).")
@click.option("--level-eps", type=float, default=None,
              help="Plateau-level merging tolerance (default: eps).")
@click.option("--extra-transitions", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON list of [source, label, target] to add.")
@click.option("--rename", "rename_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help='JSON {"states": {...}, "labels": {...}}.')
@click.option("--dot", "dot_out", type=click.Path(dir_okay=False), default="pea.dot",
              show_default=True)
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default="pea.json",
              show_default=True)
@_stage("pea")
def pea(entropy_csv, eps, window, prominence, level_eps, extra_transitions,
        rename_path, dot_out, json_out):
    """Build the persistent-entropy automaton from an entropy CSV."""
    series = entropy_mod.read_series_csv(entropy_csv)
    segments = automaton_mod.segment(series, eps=eps, window=window, prominence=prominence)
    extras = []
    if extra_transitions:
        extras = [tuple(t) for t in _load_json(extra_transitions, "extra-transitions")]
    a = automaton_mod.build_automaton(
        segments, level_eps=level_eps, extra_transitions=extras
    )
    if rename_path:
        maps = _load_json(rename_path, "rename")
        a = automaton_mod.rename(a, maps.get("states"), maps.get("labels"))
    Path(dot_out).write_text(automaton_mod.automaton_to_dot(a), encoding="utf-8")
    automaton_mod.write_automaton_json(a, json_out)
    click.echo(
        f"automaton: {len(a.states)} states, {len(a.transitions)} transitions "
        f"-> {dot_out}, {json_out}"
    )


# --- hda --------------------------------------------------------------------


def _chu_from_barcode(b: Barcode, actions_spec: dict) -> ChuSpace:
    names = actions_spec.get("names")
    if not names:
        raise ParseError('actions file needs a non-empty "names" list')
    bidirectional = bool(actions_spec.get("bidirectional", True))
    labels = actions_from_generators(b, names, bidirectional=bidirectional)
    space = full_chu(labels)
    mutex = actions_spec.get("mutex") or []
    if mutex:
        space = constrain(space, [tuple(p) for p in mutex])
    return space


@cli.command()
@click.argument("barcode_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--actions", "actions_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help='JSON: ["elicits", ...] or {"names": [...], "bidirectional": bool}.')
@click.option("--mutex", "mutex_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON list of [i, j] mutually exclusive action pairs.")
@click.option("--chu-csv", type=click.Path(dir_okay=False), default="chu.csv",
              show_default=True)
@click.option("--hasse-dot", type=click.Path(dir_okay=False), default="hasse.dot",
              show_default=True)
@_stage("hda")
def hda(barcode_json, actions_path, mutex_path, chu_csv, hasse_dot):
    """Agent Chu space and Hasse diagram from a barcode's generators."""
    b = read_barcode_json(barcode_json)
    spec = _load_json(actions_path, "actions")
    if isinstance(spec, list):
        spec = {"names": spec}
    if mutex_path:
        spec = {**spec, "mutex": _load_json(mutex_path, "mutex")}
    space = _chu_from_barcode(b, spec)
    Path(chu_csv).write_text("\n".join(chu_to_csv_lines(space)) + "\n", encoding="utf-8")
    Path(hasse_dot).write_text(hasse_to_dot(hasse(space)), encoding="utf-8")
    click.echo(
        f"chu space: {space.n_actions} actions, {space.n_states} states "
        f"-> {chu_csv}, {hasse_dot}"
    )


# --- pipeline ---------------------------------------------------------------


@cli.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Pipeline JSON config.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory (overrides the config's `out`).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Workers for per-observation homology.")
@_stage("pipeline")
def pipeline(config_path, out_dir, jobs):
    """Run the whole chain and write every artifact into one directory."""
    cfg = _load_json(config_path, "pipeline config")
    out = Path(out_dir or cfg.get("out") or "pipeline_out")
    out.mkdir(parents=True, exist_ok=True)

    if "simulate" in cfg:
        series = run_simulation(SimConfig.from_mapping(cfg["simulate"], source="pipeline"))
        write_observations_json(series, out / "observations.json")
    elif "series" in cfg:
        series = load_observations(cfg["series"])
    else:
        raise ParseError("pipeline config needs either `simulate` or `series`")

    order = cfg.get("order", DESCENDING)
    max_dim = int(cfg.get("max_dim", 1))
    barcodes = barcodes_for_series(series, order, max_dim, jobs)
    bdir = out / "barcodes"
    bdir.mkdir(exist_ok=True)
    for tick, b in barcodes:
        write_barcode_json(b, bdir / f"barcode_{tick}.json")

    eopts = cfg.get("entropy", {})
    base = _parse_log_base(str(eopts.get("log_base", "e")))
    lengths = (
        entropy_mod.WEIGHT_LENGTHS
        if eopts.get("real_lengths")
        else entropy_mod.INDEX_LENGTHS
    )
    s = entropy_mod.chronogram(
        barcodes, base=base, lengths=lengths, empty=eopts.get("empty", "zero")
    )
    entropy_mod.write_series_csv(s, out / "entropy.csv")
    (out / "entropy_by_dim.csv").write_text(
        "\n".join(entropy_mod.per_dim_csv_lines(s)) + "\n", encoding="utf-8"
    )

    sopts = cfg.get("segmentation", {})
    segments = automaton_mod.segment(
        s,
        eps=sopts.get("eps"),
        window=int(sopts.get("window", automaton_mod.DEFAULT_WINDOW)),
        prominence=sopts.get("prominence"),
    )
    a = automaton_mod.build_automaton(
        segments,
        level_eps=sopts.get("level_eps"),
        extra_transitions=[tuple(t) for t in cfg.get("extra_transitions", [])],
    )
    ren = cfg.get("rename", {})
    if ren:
        a = automaton_mod.rename(a, ren.get("states"), ren.get("labels"))
    (out / "pea.dot").write_text(automaton_mod.automaton_to_dot(a), encoding="utf-8")
    automaton_mod.write_automaton_json(a, out / "pea.json")

    if "hda" in cfg:
        hopts = cfg["hda"]
        which = hopts.get("tick", "last")
        by_tick = dict(barcodes)
        tick = barcodes[-1][0] if which == "last" else int(which)
        if tick not in by_tick:
            raise ParseError(f"hda tick {tick} is not an observed tick")
        try:
            space = _chu_from_barcode(by_tick[tick], hopts)
        except NoGenerators:
            candidates = [
                t
                for t, b in barcodes
                if any(iv.death is None and iv.dimension >= 1 for iv in b.intervals)
            ]
            raise NoGenerators(
                f"tick {tick} has no persistent generators of dimension > 0; "
                f"ticks that do: {candidates or 'none'}"
            ) from None
        (out / "chu.csv").write_text(
            "\n".join(chu_to_csv_lines(space)) + "\n", encoding="utf-8"
        )
        (out / "hasse.dot").write_text(hasse_to_dot(hasse(space)), encoding="utf-8")

    click.echo(f"pipeline artifacts in {out}/")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as e:
        e.show()
        return 1
    except click.ClickException as e:
        e.show()
        return 2
    except StageFailure as e:
        click.echo(str(e), err=True)
        return 2
    except ToolError as e:
        click.echo(str(e), err=True)
        return 2
    except Exception as e:
        click.echo(f"internal error: {e!r}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
