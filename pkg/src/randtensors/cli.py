"""Command-line entry point.

Usage::

    randtensors run CONFIG [--seed N] [--out DIR] [--set KEY=VALUE ...]
    randtensors reproduce {all,fig4,fig5,fig6} [--out DIR]
    randtensors KIND [--config CONFIG] [--FIELD VALUE ...] [--seed N] [--out DIR]

``KIND`` is one of sample, moments, lemma1, kronecker, process, spectrum and
spiked; every params field of the kind is also a flag (``--n-trials 5``,
``--betas "[1, 2, 3]"``). Values are parsed as YAML. Output goes to
``DIR/NAME`` where ``DIR`` defaults to ``$RANDTENSORS_OUT`` or
``./randtensors-out`` and ``NAME`` is the config name, its file stem or the
kind.

Exit codes: 0 success, 2 invalid config or parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .config import SCHEMAS, ConfigError, ExperimentConfig, apply_override, load_config, parse_config
from .errors import ArgumentError, DomainError, NumericalError, ShapeError

__all__ = ["main", "build_parser", "FIGURES", "OUT_ENV", "canonical_config"]

OUT_ENV = "RANDTENSORS_OUT"
DEFAULT_OUT = "randtensors-out"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

FIGURES = {
    "fig4": ("fig4a", "fig4b"),
    "fig5": ("fig5a", "fig5b"),
    "fig6": ("fig6",),
}


def canonical_config(name: str) -> Path:
    """Path of a config shipped with the package, e.g. ``fig6``."""
    path = Path(str(resources.files("randtensors") / "configs" / f"{name}.yaml"))
    if not path.is_file():
        raise ConfigError(f"no canonical config named '{name}'", "<reproduce>")
    return path


def _out_root(arg) -> Path:
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--workers", type=int, help="thread pool size for trial loops")
    p.add_argument("--name", help="run subdirectory name")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a field (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randtensors", description="Complex random tensor experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML config")
    run.add_argument("config", help="path to a YAML config")
    _common(run)

    rep = sub.add_parser("reproduce", help="run the canonical figure configs")
    rep.add_argument("figure", choices=["all", *FIGURES])
    rep.add_argument("--out", help=f"output root (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    rep.add_argument("--workers", type=int, help="thread pool size for trial loops")

    for kind, schema in SCHEMAS.items():
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="YAML config of the same kind (defaults otherwise)")
        _common(p)
        group = p.add_argument_group("params")
        for name, spec in schema.items():
            choices = f"one of {', '.join(spec.choices)}; " if spec.choices else ""
            group.add_argument(
                f"--{name.replace('_', '-')}", dest=f"param_{name}", metavar=spec.type.upper(),
                help=(spec.help + " " if spec.help else "") + f"({choices}default {spec.default!r})",
            )
    return parser


def _with_overrides(cfg: ExperimentConfig, args, params: dict) -> ExperimentConfig:
    for key in ("seed", "workers", "name"):
        value = getattr(args, key, None)
        if value is not None:
            cfg = apply_override(cfg, key, value)
    for name, value in params.items():
        cfg = apply_override(cfg, name, value)
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", "<override>")
        cfg = apply_override(cfg, key.strip(), value)
    return cfg


def _run_dir(cfg: ExperimentConfig, root: Path) -> Path:
    name = cfg.name or (Path(cfg.source).stem if cfg.source.endswith((".yaml", ".yml")) else cfg.kind)
    return root / name


def _execute(cfg: ExperimentConfig, root: Path) -> int:
    from .experiments import execute  # heavy imports only when running

    out = _run_dir(cfg, root)
    try:
        manifest = execute(cfg, out)
    except NumericalError as e:
        report = {
            "status": "numeric-error",
            "type": type(e).__name__,
            "message": str(e),
            "details": {k: v for k, v in vars(e).items() if isinstance(v, (int, float, str))},
            "config": cfg.snapshot(),
        }
        text = json.dumps(report, indent=2, sort_keys=True, default=str)
        (out / "error.json").write_text(text + "\n")
        print(text, file=sys.stderr)
        return EXIT_NUMERIC
    print(f"{cfg.kind}: wrote {len(manifest.files)} files to {out}")
    for key, value in sorted(manifest.summary.items()):
        print(f"  {key} = {value}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reproduce":
            names = [n for fig in (FIGURES if args.figure == "all" else [args.figure]) for n in FIGURES[fig]]
            status = EXIT_OK
            for name in names:
                cfg = load_config(canonical_config(name))
                if args.workers:
                    cfg = apply_override(cfg, "workers", args.workers)
                status = max(status, _execute(cfg, _out_root(args.out)))
            return status
        if args.command == "run":
            cfg = load_config(args.config)
            params = {}
        else:
            if args.config:
                cfg = load_config(args.config)
                if cfg.kind != args.command:
                    raise ConfigError(f"field 'kind': config is '{cfg.kind}', subcommand is '{args.command}'", cfg.source)
            else:
                cfg = parse_config({"kind": args.command}, f"<{args.command} defaults>")
            params = {k[len("param_"):]: v for k, v in vars(args).items() if k.startswith("param_") and v is not None}
        cfg = _with_overrides(cfg, args, params)
        return _execute(cfg, _out_root(args.out))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArgumentError, ShapeError, DomainError) as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
