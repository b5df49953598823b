"""Command-line entry point: ``scarf2d {spectrum,state,verify}``.

Settings resolve as built-in defaults < ``--config`` JSON file < flags.
Reports are JSON arrays whose records all carry ``"schema_version": 1``;
state grids are CSV with ``#``-prefixed header lines. Outputs are written
atomically and contain no timestamps, so identical inputs give identical
bytes.

Exit codes: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 domain error (index, region or selection rule).
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .exceptions import DomainError, RegionError, Scarf2DError
from .operators import WaveFunction, hamiltonian
from .scarf1d import ModelParams
from .solvers import (
    MAX_CHAIN_DEPTH,
    SpectrumEntry,
    chain_state,
    exact_branch_spectrum,
    exact_branch_state,
    quasi_exact_spectrum,
    separable_state,
    zero_mode,
)
from . import verify as V

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3

SUITES = ("identities", "symmetry", "eigen", "degeneracy", "normalizability", "all")
KINDS = ("auto", "zero_mode", "chain", "exact", "separable")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "spectrum"
    a: float = 1.0
    b: float = 4.5
    c: float = 1.0
    branch: str = "quasi"
    k: Optional[int] = None
    n: Optional[int] = None
    m: Optional[int] = None
    M: int = 0
    parity: int = -1
    kind: str = "auto"
    nmax: int = 2
    mmax: int = 2
    Mmax: int = 0
    N: Optional[int] = None
    samples: int = 50
    seed: int = V.DEFAULT_SEED
    suite: str = "all"
    L: float = 12.0
    nodes: int = 128
    strip: float = 0.1
    grid: int = 101
    extent: float = 5.0
    grid_strip: float = 0.05
    normalizability: bool = False
    out: Optional[str] = None
    format: Optional[str] = None

    @property
    def params(self) -> ModelParams:
        if self.branch == "exact":
            return ModelParams(-float(self.exact_k), self.b, self.c)
        return ModelParams(self.a, self.b, self.c)

    @property
    def exact_k(self) -> int:
        if self.k is not None:
            return self.k
        if self.a <= -1 and float(self.a).is_integer():
            return int(-self.a)
        raise RegionError(f"exact branch needs --k or a negative integer --a, got a = {self.a}")

    @property
    def quadrature(self) -> V.QuadratureConfig:
        return V.QuadratureConfig(L=self.L, nodes=self.nodes, strip=self.strip)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _validate(cfg: RunConfig) -> RunConfig:
    if cfg.branch not in ("quasi", "exact"):
        raise ConfigError(f"branch must be 'quasi' or 'exact', got {cfg.branch!r}")
    if cfg.suite not in SUITES:
        raise ConfigError(f"suite must be one of {SUITES}, got {cfg.suite!r}")
    if cfg.kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {cfg.kind!r}")
    if cfg.parity not in (1, -1):
        raise ConfigError("parity must be 1 or -1")
    for name in ("a", "b", "c", "L", "strip", "extent", "grid_strip"):
        v = getattr(cfg, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ConfigError(f"{name} must be a finite number, got {v!r}")
    for name in ("nmax", "mmax", "Mmax", "M", "samples", "nodes", "grid", "seed"):
        v = getattr(cfg, name)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
    for name in ("k", "n", "m", "N"):
        v = getattr(cfg, name)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 0):
            raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
    if cfg.samples < 1 or cfg.nodes < 2 or cfg.grid < 2:
        raise ConfigError("samples must be >= 1, nodes and grid >= 2")
    if cfg.L <= 0 or cfg.strip <= 0 or cfg.extent <= 0 or cfg.grid_strip < 0:
        raise ConfigError("L, strip and extent must be positive; grid_strip non-negative")
    if cfg.format not in (None, "json", "csv"):
        raise ConfigError(f"format must be json or csv, got {cfg.format!r}")
    expected = "csv" if cfg.command == "state" else "json"
    if cfg.format not in (None, expected):
        raise ConfigError(f"the {cfg.command} command writes {expected}, not {cfg.format}")
    cfg.format = expected
    try:
        ModelParams(cfg.a, cfg.b, cfg.c)
    except DomainError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(_FIELD_TYPES) - {"command"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("a", "b", "c", "L", "strip", "extent", "grid_strip"):
        if isinstance(data.get(key), int) and not isinstance(data.get(key), bool):
            data[key] = float(data[key])
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scarf2d",
        description="Spectra, wave functions and identity checks for the two-dimensional Scarf II model.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=S, help="JSON file with settings; flags override it")
        p.add_argument("--a", type=float, default=S, help="coupling a (default 1)")
        p.add_argument("--b", type=float, default=S, help="coupling b, positive non-integer (default 4.5)")
        p.add_argument("--c", type=float, default=S, help="coupling c > 0 (default 1)")
        p.add_argument("--branch", choices=("quasi", "exact"), default=S)
        p.add_argument("--k", type=int, default=S, help="exact branch: a = -k")
        p.add_argument("--N", type=int, default=S, help="zero modes kept in the C matrix")
        p.add_argument("--out", default=S, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=S)

    sp = sub.add_parser("spectrum", help="list energy levels", allow_abbrev=False)
    common(sp)
    sp.add_argument("--nmax", type=int, default=S)
    sp.add_argument("--mmax", type=int, default=S)
    sp.add_argument("--Mmax", type=int, default=S)
    sp.add_argument("--normalizability", action="store_true", default=S,
                    help="attach a quadrature normalizability verdict to each level")
    sp.add_argument("--L", type=float, default=S)
    sp.add_argument("--nodes", type=int, default=S)
    sp.add_argument("--strip", type=float, default=S)

    st = sub.add_parser("state", help="evaluate a wave function on a grid (CSV)", allow_abbrev=False)
    common(st)
    st.add_argument("--kind", choices=KINDS, default=S)
    st.add_argument("--n", type=int, default=S)
    st.add_argument("--m", type=int, default=S)
    st.add_argument("--M", type=int, default=S)
    st.add_argument("--parity", type=int, choices=(1, -1), default=S)
    st.add_argument("--grid", type=int, default=S, help="points per axis (default 101)")
    st.add_argument("--extent", type=float, default=S, help="grid covers [-extent, extent]^2")
    st.add_argument("--grid-strip", dest="grid_strip", type=float, default=S,
                    help="drop grid points with |x1 - x2| below this (default 0.05)")

    vp = sub.add_parser("verify", help="run checks and write a JSON report", allow_abbrev=False)
    common(vp)
    vp.add_argument("--suite", choices=SUITES, default=S)
    vp.add_argument("--n", type=int, default=S)
    vp.add_argument("--m", type=int, default=S)
    vp.add_argument("--M", type=int, default=S)
    vp.add_argument("--nmax", type=int, default=S)
    vp.add_argument("--mmax", type=int, default=S)
    vp.add_argument("--Mmax", type=int, default=S)
    vp.add_argument("--samples", type=int, default=S)
    vp.add_argument("--seed", type=int, default=S)
    vp.add_argument("--L", type=float, default=S)
    vp.add_argument("--nodes", type=int, default=S)
    vp.add_argument("--strip", type=float, default=S)
    return parser


def resolve_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    merged: Dict = {}
    if "config" in args:
        merged.update(_load_config_file(args.pop("config")))
    merged.update(args)
    return _validate(RunConfig(**merged))


# ------------------------------------------------------------------ output

def thread_count() -> int:
    raw = os.environ.get("SCARF2D_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"SCARF2D_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ConfigError("SCARF2D_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _parallel_map(fn: Callable, items: Sequence) -> List:
    workers = min(thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _finite(obj):
    """Replace non-finite floats with None so that every emitted number is finite."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".scarf2d-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_schema() -> dict:
    """The JSON schema every report written by this module validates against."""
    from importlib.resources import files

    return json.loads(files("scarf2d").joinpath("schemas/report.schema.json").read_text(encoding="utf-8"))


def dump_json(records: List[dict]) -> str:
    return json.dumps(_finite(records), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------- commands

def _spectrum_record(e: SpectrumEntry) -> dict:
    d = e.as_dict()
    d.update(schema_version=SCHEMA_VERSION, kind="spectrum")
    return d


def cmd_spectrum(cfg: RunConfig) -> int:
    p = cfg.params
    if cfg.branch == "exact":
        entries = exact_branch_spectrum(cfg.exact_k, cfg.b, cfg.nmax, cfg.c)
    else:
        entries = quasi_exact_spectrum(p, cfg.nmax, cfg.mmax, cfg.Mmax)
    if cfg.normalizability:
        def judge(e):
            if cfg.branch == "exact":
                psi = exact_branch_state(cfg.exact_k, e.indices[0], e.indices[1], p)
            else:
                psi = chain_state(*e.indices, p, cfg.N)
            return V.norm_quadrature(psi, cfg.quadrature).converged

        verdicts = _parallel_map(judge, entries)
        entries = [SpectrumEntry(e.branch, e.indices, e.energy, e.params, v, e.degenerate)
                   for e, v in zip(entries, verdicts)]
    _write(dump_json([_spectrum_record(e) for e in entries]), cfg.out)
    return EXIT_OK


def _require_quasi(p: ModelParams) -> None:
    if p.a <= -0.5:
        raise RegionError(f"quasi-exact regime needs a > -1/2, got a = {p.a}")


def build_state(cfg: RunConfig) -> WaveFunction:
    n = 0 if cfg.n is None else cfg.n
    kind = cfg.kind
    if kind == "auto":
        kind = "exact" if cfg.branch == "exact" else "chain"
    if kind == "separable":
        m = n if cfg.m is None else cfg.m
        return separable_state(n, m, cfg.parity, cfg.b, cfg.c)
    if kind == "exact":
        if cfg.m is None:
            raise ConfigError("exact states need both --n and --m")
        k = cfg.exact_k
        return exact_branch_state(k, n, cfg.m, ModelParams(-float(k), cfg.b, cfg.c))
    p = ModelParams(cfg.a, cfg.b, cfg.c)
    if kind == "zero_mode":
        return zero_mode(n, p)
    _require_quasi(p)
    return chain_state(n, cfg.m or 0, cfg.M, p, cfg.N)


def grid_points(cfg: RunConfig):
    idx = np.arange(cfg.grid)
    h = 2.0 * cfg.extent / (cfg.grid - 1)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    # decide exclusion on integer offsets so grid-aligned strips are unambiguous
    keep = np.abs(i - j) * h >= cfg.grid_strip - 1e-12 * h
    keep &= i != j
    x = -cfg.extent + h * idx
    return x[i[keep]], x[j[keep]]


def cmd_state(cfg: RunConfig) -> int:
    psi = build_state(cfg)
    x1, x2 = grid_points(cfg)
    chunks = np.array_split(np.arange(x1.size), max(1, min(thread_count(), 16)))
    vals = _parallel_map(lambda ix: psi((x1[ix], x2[ix])), [c for c in chunks if c.size])
    values = np.concatenate(vals) if vals else np.empty(0)
    meta = psi.meta()
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION}\n")
    buf.write("# kind: state_grid\n")
    buf.write(f"# label: {meta['label']}\n")
    buf.write(f"# indices: {json.dumps(meta['indices'], sort_keys=True)}\n")
    buf.write(f"# params: {json.dumps(meta.get('params'), sort_keys=True)}\n")
    buf.write(f"# energy: {json.dumps(meta['energy'])}\n")
    buf.write(f"# grid: {cfg.grid} extent: {cfg.extent!r} grid_strip: {cfg.grid_strip!r}\n")
    buf.write("x1,x2,psi\n")
    for a, b, v in zip(x1, x2, values):
        buf.write(f"{float(a)!r},{float(b)!r},{float(v)!r}\n")
    _write(buf.getvalue(), cfg.out)
    return EXIT_OK


def _norm_record(label: str, p: ModelParams, res: V.NormResult, qc: V.QuadratureConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "norm",
        "state": label,
        "params": p.as_dict(),
        "value": res.value,
        "converged": res.converged,
        "strip_exponent": res.exponent,
        "expected_strip_exponent": 2 * p.a + 1,
        "quadrature": asdict(qc),
    }


def verify_records(cfg: RunConfig) -> List[dict]:
    suite = cfg.suite
    p = cfg.params
    jobs: List[Callable[[], dict]] = []
    if suite in ("identities", "all"):
        for ident in V.IDENTITIES:
            jobs.append(lambda ident=ident: V.identity_residual(ident, p, cfg.samples, cfg.seed).as_dict())
    if suite in ("symmetry", "all"):
        if cfg.branch == "exact":
            raise RegionError("symmetry-operator predictions concern the quasi-exact branch")
        _require_quasi(p)
        if cfg.n is not None or cfg.m is not None:
            pairs = [(cfg.n or 0, cfg.m or 0)]
        else:
            pairs = [(n, m) for n in range(cfg.nmax + 1) for m in range(cfg.mmax + 1) if n < p.b]
        for n, m in pairs:
            jobs.append(lambda n=n, m=m: V.symmetry_eigenvalue_check(n, m, p, seed=cfg.seed).as_dict())
        if cfg.M > 0:
            jobs.append(lambda: V.rt_eigen_check(cfg.n or 0, cfg.m or 0, cfg.M, p, seed=cfg.seed).as_dict())
    if suite in ("eigen", "all"):
        if cfg.branch == "exact":
            k = cfg.exact_k
            H = hamiltonian("H1", p)
            for e in exact_branch_spectrum(k, cfg.b, cfg.nmax, cfg.c):
                jobs.append(lambda e=e: V.eigen_residual(
                    H, exact_branch_state(k, e.indices[0], e.indices[1], p), e.energy, seed=cfg.seed).as_dict())
        else:
            _require_quasi(p)
            H = hamiltonian("H1", p)
            for e in quasi_exact_spectrum(p, cfg.nmax, cfg.mmax, cfg.Mmax):
                if sum(e.indices[1:]) > MAX_CHAIN_DEPTH:
                    continue
                jobs.append(lambda e=e: V.eigen_residual(H, chain_state(*e.indices, p, cfg.N), e.energy,
                                                         seed=cfg.seed).as_dict())
    if suite in ("normalizability",):
        n = cfg.n or 0
        jobs.append(lambda: _norm_record(f"Omega[{n}]", p, V.norm_quadrature(zero_mode(n, p), cfg.quadrature),
                                         cfg.quadrature))
    records = _parallel_map(lambda job: job(), jobs)
    if suite in ("degeneracy", "all"):
        records.extend(r.as_dict() for r in V.degeneracy_scan(cfg.b, cfg.c, range(cfg.nmax + 1),
                                                              range(cfg.mmax + 1)))
    return records


def cmd_verify(cfg: RunConfig) -> int:
    records = verify_records(cfg)
    _write(dump_json(records), cfg.out)
    failed = [r for r in records if r.get("kind") == "residual" and not r["pass"]]
    return EXIT_FAILED if failed else EXIT_OK


COMMANDS = {"spectrum": cmd_spectrum, "state": cmd_state, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = resolve_config(argv)
        thread_count()
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except DomainError as exc:
        print(f"scarf2d: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"scarf2d: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"scarf2d: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, Scarf2DError) as exc:
        print(f"scarf2d: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
