"""Command-line experiment runner.

    dupnet simulate --config run.cfg --out results/
    dupnet verify decay

Configuration is either a JSON object or ``key = value`` lines (``#``
starts a comment).  Recognised keys::

    lambda mu n f_n beta kind horizon h replicas seed out x0 x1 gamma y

``f_n`` wins over ``beta`` when both are given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace

from . import _csv
from .core import ModelParams, NetworkState
from .critical import CriticalParams, ensemble_moments
from .ctmc import replica_seeds, run_replicas, simulate, trajectories_csv
from .decay import psi_curve, psi_ode
from .fluid import closed_form_curve, fluid_gsp
from .stats import reports_csv
from .verify import SUITES, run_suite

log = logging.getLogger("dupnet")

KINDS = ("simulate", "fluid", "critical", "decay", "verify")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "simulate"
    suite: str | None = None
    lam: float | None = None
    mu: float | None = None
    n: int | None = None
    f_n: int | None = None
    beta: float | None = None
    horizon: float | None = None
    h: float | None = None
    replicas: int = 1
    seed: int = 0
    out: str = "."
    x0: int = 0
    x1: int = 0
    gamma: float | None = None
    y: float = 0.0
    parallelism: int | None = None

    def model(self):
        """Network parameters; ``f_n`` takes precedence over ``beta``."""
        for key, value in (("lambda", self.lam), ("mu", self.mu), ("n", self.n)):
            if value is None:
                raise ConfigError(key, f"required for kind {self.kind!r}")
        if self.f_n is None and self.beta is None:
            raise ConfigError("f_n", "give f_n or beta")
        try:
            if self.f_n is not None:
                return ModelParams(self.lam, self.mu, self.n, self.f_n)
            return ModelParams.from_beta(self.lam, self.mu, self.n, self.beta)
        except ValueError as exc:
            raise ConfigError(_field_of(exc), str(exc)) from None

    def effective_beta(self):
        if self.f_n is not None:
            if self.n is None:
                raise ConfigError("n", "required with f_n")
            return self.f_n / self.n
        if self.beta is None:
            raise ConfigError("beta", f"required for kind {self.kind!r}")
        return self.beta


def _field_of(exc):
    word = str(exc).split()[0]
    return word if word in _KEYS else "config"


# config key -> (attribute, type)
_KEYS = {
    "lambda": ("lam", float), "mu": ("mu", float), "n": ("n", int), "f_n": ("f_n", int),
    "beta": ("beta", float), "kind": ("kind", str), "horizon": ("horizon", float),
    "h": ("h", float), "replicas": ("replicas", int), "seed": ("seed", int), "out": ("out", str),
    "x0": ("x0", int), "x1": ("x1", int), "gamma": ("gamma", float), "y": ("y", float),
    "suite": ("suite", str), "parallelism": ("parallelism", int),
}


def _convert(key, raw, typ):
    if typ is str:
        if not isinstance(raw, str):
            raise ConfigError(key, f"expected text, got {raw!r}")
        return raw
    if isinstance(raw, bool):
        raise ConfigError(key, f"expected a number, got {raw!r}")
    try:
        value = float(raw) if typ is float else raw
        if typ is int:
            as_float = float(raw)
            if not as_float.is_integer():
                raise ValueError
            value = int(as_float)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {'an integer' if typ is int else 'a number'}, got {raw!r}") from None
    return value


def parse_config(text, **overrides):
    """Parse and validate configuration text into an :class:`ExperimentConfig`.

    ``overrides`` (command-line values such as ``kind`` or ``seed``) replace
    what the text says before validation.
    """
    stripped = text.strip()
    if not stripped:
        raw = {}
    elif stripped.startswith("{"):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "JSON configuration must be an object")
    else:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise ConfigError("config", f"line {lineno} is not 'key = value'")
            key, value = (part.strip() for part in line.split(sep, 1))
            raw[key] = value.strip("'\"")
    values = {}
    for key, value in raw.items():
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        attr, typ = _KEYS[key]
        values[attr] = _convert(key, value, typ)
    if "f_n" in values and "beta" in values:
        log.warning("both f_n and beta given; using f_n=%s and ignoring beta", values["f_n"])
        del values["beta"]
    values.update(overrides)
    return validate(ExperimentConfig(**values))


def validate(cfg):
    if cfg.kind.startswith("verify:"):
        cfg = replace(cfg, kind="verify", suite=cfg.kind.split(":", 1)[1])
    if cfg.kind not in KINDS:
        raise ConfigError("kind", f"must be one of {', '.join(KINDS)} or verify:<suite>")
    positive = {"lambda": cfg.lam, "mu": cfg.mu, "beta": cfg.beta, "h": cfg.h}
    for key, value in positive.items():
        if value is not None and not value > 0:
            raise ConfigError(key, f"must be positive, got {value}")
    for key, value in (("n", cfg.n), ("f_n", cfg.f_n), ("replicas", cfg.replicas)):
        if value is not None and value < 1:
            raise ConfigError(key, f"must be at least 1, got {value}")
    if cfg.horizon is not None and not cfg.horizon >= 0:
        raise ConfigError("horizon", f"must be nonnegative, got {cfg.horizon}")
    for key, value in (("x0", cfg.x0), ("x1", cfg.x1), ("seed", cfg.seed)):
        if value < 0:
            raise ConfigError(key, f"must be nonnegative, got {value}")
    if cfg.y < 0:
        raise ConfigError("y", "must be nonnegative")
    if cfg.kind == "verify" and cfg.suite not in SUITES:
        raise ConfigError("suite", f"must be one of {', '.join(SUITES)}")
    if cfg.kind == "simulate":
        p = cfg.model()
        if not p.contains((cfg.x0, cfg.x1)):
            raise ConfigError("x1", f"initial state ({cfg.x0}, {cfg.x1}) exceeds f_n={p.f_n}")
        if cfg.horizon is None:
            raise ConfigError("horizon", "required for kind 'simulate'")
    if cfg.kind in ("fluid", "decay", "critical"):
        for key, value in (("lambda", cfg.lam), ("mu", cfg.mu), ("horizon", cfg.horizon), ("h", cfg.h)):
            if value is None:
                raise ConfigError(key, f"required for kind {cfg.kind!r}")
    if cfg.kind in ("fluid", "decay"):
        cfg.effective_beta()
    if cfg.kind == "critical" and cfg.replicas < 2:
        raise ConfigError("replicas", "critical ensembles need at least 2 paths")
    return cfg


def _run_simulate(cfg, out):
    p = cfg.model()
    seeds = replica_seeds(cfg.seed, cfg.replicas)
    start = NetworkState(cfg.x0, cfg.x1)
    trs = run_replicas(lambda s: simulate(p, start, cfg.horizon, seed=s), seeds, cfg.parallelism)
    written = []
    for i, tr in enumerate(trs):
        path = os.path.join(out, f"trajectory_{i:04d}.csv")
        tr.to_csv(path)
        written.append(path)
    path = os.path.join(out, "trajectories.csv")
    trajectories_csv(trs, path)
    written.append(path)
    rows = [(i, tr.seed, tr.absorbed, len(tr), tr.final_state.x0, tr.final_state.x1)
            for i, tr in enumerate(trs)]
    path = os.path.join(out, "replicas.csv")
    _csv.write(path, ("replica", "seed", "absorbed", "events", "x0", "x1"), rows)
    written.append(path)
    return written, EXIT_OK


def _run_fluid(cfg, out):
    beta = cfg.effective_beta()
    closed = closed_form_curve(beta, cfg.lam / cfg.mu, cfg.mu, cfg.horizon, cfg.h)
    gsp = fluid_gsp(beta, cfg.lam, cfg.mu, cfg.horizon, cfg.h)
    paths = [os.path.join(out, "fluid_closed_form.csv"), os.path.join(out, "fluid_gsp.csv")]
    closed.to_csv(paths[0])
    gsp.to_csv(paths[1])
    return paths, EXIT_OK


def _run_critical(cfg, out):
    gamma = cfg.gamma
    if gamma is None:
        gamma = cfg.model().gamma if cfg.n is not None and (cfg.f_n or cfg.beta) else 0.0
    cp = CriticalParams(cfg.lam, cfg.mu, gamma, cfg.y)
    mom = ensemble_moments(cp, cfg.horizon, cfg.h, cfg.replicas, seed=cfg.seed)
    path = os.path.join(out, "critical_ensemble.csv")
    mom.to_csv(path)
    return [path], EXIT_OK


def _run_decay(cfg, out):
    beta = cfg.effective_beta()
    rho = cfg.lam / cfg.mu
    try:
        curve = psi_curve(beta, rho, cfg.mu, cfg.horizon, cfg.h)
        ode = psi_ode(beta, rho, cfg.mu, cfg.horizon, cfg.h)
    except ValueError as exc:
        raise ConfigError("lambda", str(exc)) from None
    paths = [os.path.join(out, "decay.csv"), os.path.join(out, "decay_ode.csv")]
    curve.to_csv(paths[0])
    ode.to_csv(paths[1])
    return paths, EXIT_OK


def _run_verify(cfg, out):
    reports = run_suite(cfg.suite, seed=cfg.seed, parallelism=cfg.parallelism)
    for r in reports:
        for line in r.lines():
            print(line)
    path = os.path.join(out, f"verify_{cfg.suite}.csv")
    reports_csv(reports, path)
    ok = all(r.passed for r in reports)
    print(f"suite {cfg.suite}: {'PASS' if ok else 'FAIL'}")
    return [path], EXIT_OK if ok else EXIT_FAILED


_RUNNERS = {"simulate": _run_simulate, "fluid": _run_fluid, "critical": _run_critical,
            "decay": _run_decay, "verify": _run_verify}


def run(cfg):
    """Execute one experiment; returns ``(written paths, exit status)``."""
    try:
        os.makedirs(cfg.out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {cfg.out!r}: {exc}") from exc
    return _RUNNERS[cfg.kind](cfg, cfg.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="dupnet", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="configuration file")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--replicas", type=int, help="number of replicas / paths")
    common.add_argument("--parallelism", type=int, help="worker threads for replicas")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ("simulate", "fluid", "critical", "decay"):
        sub.add_parser(kind, parents=[common], help=f"run a {kind} experiment")
    ver = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    suites = [None]
    if args.command == "verify":
        suites = sorted(SUITES) if args.suite == "all" else [args.suite]
    status = EXIT_OK
    for suite in suites:
        try:
            overrides = {"kind": args.command}
            if suite is not None:
                overrides["suite"] = suite
            for key in ("seed", "out", "replicas", "parallelism"):
                if getattr(args, key) is not None:
                    overrides[key] = getattr(args, key)
            cfg = parse_config(text, **overrides)
        except ConfigError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        try:
            written, code = run(cfg)
        except ConfigError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except OSError as exc:
            print(f"io error: {exc}", file=sys.stderr)
            return EXIT_IO
        for path in written:
            log.info("wrote %s", path)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
