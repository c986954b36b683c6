"""Command-line front end.

Exit codes: 0 success, 1 an inequality failed, 2 usage or configuration
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CorpusSpec, generate_corpus
from .errors import DomainError, OpdamError
from .functions import SampledFunction, fmt
from .inequalities import (NAMES, RayleighEstimate, Status, estimate_lambda_min,
                           reports_to_csv, reports_to_json, run_suite)
from .measure import ConstantsFit, fit_c_constants
from .quadrature import QuadratureSpec
from .specfun import Parameters, opdam_kernel
from .transform import forward

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("csv", "json")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    params: list
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    fit_window: tuple = (2.0, 100.0, 200)
    output_dir: Path = Path(".")
    formats: tuple = FORMATS

    def validate(self):
        big_n, lam_max, samples = self.fit_window
        if not (1 <= big_n < lam_max and math.isfinite(lam_max)):
            raise UsageError(f"fit window needs 1 <= bigN < lambda_max, got {big_n}, {lam_max}")
        if samples < 10:
            raise UsageError(f"fit window needs at least 10 samples, got {samples}")
        bad = set(self.formats) - set(FORMATS)
        if bad or not self.formats:
            raise UsageError(f"formats must be a nonempty subset of {FORMATS}")

    def to_dict(self) -> dict:
        return {"params": [p.to_dict() for p in self.params], "quad": self.quad.to_dict(),
                "corpus": self.corpus.to_dict(), "fit_window": list(self.fit_window),
                "output_dir": str(self.output_dir), "formats": list(self.formats)}


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON RunConfig; flags override it")
    common.add_argument("--alpha", help="alpha, or a comma list paired with --beta")
    common.add_argument("--beta", help="beta, or a comma list paired with --alpha")
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--corpus", help="CorpusSpec JSON file")
    common.add_argument("--constants", help="constants JSON written by the constants command")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", help="csv, json or csv,json")
    common.add_argument("--seed", type=int)
    common.add_argument("--bigN", type=float)
    common.add_argument("--lambda-max", type=float)
    common.add_argument("--samples", type=int)

    ap = argparse.ArgumentParser(prog="opdam", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    k = sub.add_parser("kernel", parents=[common], help="tabulate G_lambda(x)")
    k.add_argument("--lambda", dest="lam", type=float, required=True)
    k.add_argument("--range", dest="xrange", default="-1:1:11", help="START:STOP:COUNT")
    t = sub.add_parser("transform", parents=[common], help="forward transform of a function")
    t.add_argument("--input", required=True, help="SampledFunction CSV or JSON")
    t.add_argument("--lambdas", default="-40:40:2049", help="START:STOP:COUNT")
    sub.add_parser("constants", parents=[common], help="fit k1, k2 and estimate lambda_min")
    v = sub.add_parser("verify", parents=[common], help="run the inequality suite")
    v.add_argument("--suite", default="all", help="NAME[,NAME...] or all")
    return ap


def parse_range(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed range {text!r}; expected START:STOP:COUNT") from None
    if n < 1 or not (math.isfinite(a) and math.isfinite(b)) or (n > 1 and not a < b):
        raise UsageError(f"malformed range {text!r}")
    return np.linspace(a, b, n)


def load_config(args) -> RunConfig:
    doc = {}
    if args.config:
        doc = _read_json(args.config)
    params = [Parameters(float(p["alpha"]), float(p["beta"])) for p in doc.get("params", [])]
    if args.alpha is not None or args.beta is not None:
        al = _floats(args.alpha or "0", "--alpha")
        be = _floats(args.beta or "0", "--beta")
        if len(al) != len(be):
            if len(al) == 1:
                al = al * len(be)
            elif len(be) == 1:
                be = be * len(al)
            else:
                raise UsageError("--alpha and --beta lists must have equal length")
        params = [Parameters(a, b) for a, b in zip(al, be)]
    if not params:
        params = [Parameters(0.0, 0.0)]
    quad = QuadratureSpec.from_dict(doc["quad"]) if "quad" in doc else QuadratureSpec()
    if args.rel_tol is not None or args.abs_tol is not None:
        quad = QuadratureSpec(args.rel_tol or quad.rel_tol, args.abs_tol or quad.abs_tol,
                              quad.max_panels, quad.truncation)
    corpus = CorpusSpec.from_dict(doc["corpus"]) if "corpus" in doc else CorpusSpec()
    if args.corpus:
        corpus = CorpusSpec.from_dict(_read_json(args.corpus))
    if args.seed is not None:
        d = corpus.to_dict()
        d["seed"] = args.seed
        corpus = CorpusSpec.from_dict(d)
    fw = list(doc.get("fit_window", (2.0, 100.0, 200)))
    for i, v in enumerate((args.bigN, args.lambda_max, args.samples)):
        if v is not None:
            fw[i] = v
    out = Path(args.out or doc.get("output_dir", "."))
    formats = tuple(doc.get("formats", FORMATS))
    if args.format:
        formats = tuple(s.strip() for s in args.format.split(",") if s.strip())
    cfg = RunConfig(params, quad, corpus, (float(fw[0]), float(fw[1]), int(fw[2])), out,
                    formats)
    cfg.validate()
    return cfg


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.output_dir / name
    path.write_text(text, newline="")
    return path


def _table(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- commands -------------------------------------------------------------------

def cmd_kernel(cfg: RunConfig, lam: float, xs: np.ndarray, out=None) -> int:
    out = out or sys.stdout
    for p in cfg.params:
        g = np.atleast_1d(opdam_kernel(p, lam, xs))
        rows = [[fmt(x), fmt(v.real), fmt(v.imag)] for x, v in zip(xs, g)]
        if len(cfg.params) > 1:
            out.write(f"# alpha={fmt(p.alpha)} beta={fmt(p.beta)}\n")
        out.write(_table(rows, ["x", "re", "im"]))
    return EXIT_OK


def cmd_transform(cfg: RunConfig, path: str, lams: np.ndarray) -> int:
    text = Path(path).read_text()
    f = SampledFunction.from_json(text) if path.endswith(".json") else \
        SampledFunction.from_csv(text)
    for p in cfg.params:
        hf = forward(f, p, lams, cfg.quad)
        suffix = "" if len(cfg.params) == 1 else f"_a{fmt(p.alpha)}_b{fmt(p.beta)}"
        if "csv" in cfg.formats:
            _write(cfg, f"transform{suffix}.csv", hf.to_csv())
        if "json" in cfg.formats:
            _write(cfg, f"transform{suffix}.json", hf.to_json())
    return EXIT_OK


def constants_doc(cfg: RunConfig) -> dict:
    entries = []
    for p in cfg.params:
        fit = fit_c_constants(p, *cfg.fit_window)
        corpus = generate_corpus(cfg.corpus, p, quad=cfg.quad)
        ray = estimate_lambda_min(corpus, p, cfg.quad)
        entries.append({"alpha": fmt(p.alpha), "beta": fmt(p.beta),
                        "fit": json.loads(fit.to_json()),
                        "rayleigh": {"value": fmt(ray.value), "witness": ray.witness,
                                     "corpus_size": ray.corpus_size}})
    return {"entries": entries}


def cmd_constants(cfg: RunConfig) -> int:
    _write(cfg, "constants.json", json.dumps(constants_doc(cfg), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def _lookup_constants(doc: dict, p: Parameters):
    for e in doc.get("entries", []):
        if float(e["alpha"]) == p.alpha and float(e["beta"]) == p.beta:
            return ConstantsFit.from_dict(e["fit"]), RayleighEstimate.from_dict(e["rayleigh"])
    raise UsageError(f"constants file has no entry for alpha={p.alpha}, beta={p.beta}")


def parse_suite(text: str) -> list[str]:
    if text.strip() == "all":
        return list(NAMES)
    names = [s.strip() for s in text.split(",") if s.strip()]
    if not names:
        raise UsageError("empty suite selection")
    unknown = [n for n in names if n not in NAMES]
    if unknown:
        raise UsageError(f"unknown suite names {unknown}; choose from {', '.join(NAMES)}")
    return names


def cmd_verify(cfg: RunConfig, names: list[str], constants_path: str | None = None,
               err=None) -> int:
    err = err or sys.stderr
    doc = _read_json(constants_path) if constants_path else None
    reports, errors = [], []
    for p in cfg.params:
        corpus = generate_corpus(cfg.corpus, p, quad=cfg.quad)
        if doc is not None:
            fit, ray = _lookup_constants(doc, p)
        else:
            fit = fit_c_constants(p, *cfg.fit_window)
            ray = estimate_lambda_min(corpus, p, cfg.quad)
        reports += run_suite(corpus, p, fit, ray.value, cfg.quad, names,
                             on_error=lambda n, m, e: errors.append((n, m, p, e)))
    reports.sort(key=lambda r: r.sort_key())
    if "json" in cfg.formats:
        _write(cfg, "report.json", reports_to_json(reports))
    if "csv" in cfg.formats:
        _write(cfg, "report.csv", reports_to_csv(reports))
    failed = [r for r in reports if r.status is Status.FAIL]
    regime = [r for r in reports if r.status is Status.OUT_OF_REGIME]
    for r in failed:
        err.write(f"FAIL {r.name} {r.member} lhs={fmt(r.lhs)} rhs={fmt(r.rhs)}\n")
    for r in regime:
        err.write(f"OutOfRegime {r.name} {r.member}\n")
    for n, m, p, e in errors:
        err.write(f"ERROR {n} {m} alpha={p.alpha} beta={p.beta}: {e}\n")
    if failed:
        return EXIT_VIOLATION
    return EXIT_NUMERIC if errors else EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = load_config(args)
        if args.command == "kernel":
            return cmd_kernel(cfg, args.lam, parse_range(args.xrange))
        if args.command == "transform":
            return cmd_transform(cfg, args.input, parse_range(args.lambdas))
        if args.command == "constants":
            return cmd_constants(cfg)
        return cmd_verify(cfg, parse_suite(args.suite), args.constants)
    except (UsageError, DomainError, KeyError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OpdamError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
