"""Command-line front end: twistmin <command> [flags]."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import localdata as ld
from ._arith import factor, prime_power, primes_upto
from .chars import DirichletChar, is_minimal, legendre
from .congr_oracle import S_p_direct, omega_closedform_check
from .quadfield import CacheBoundError, ClassCache, DEFAULT_BOUND, split_fundamental
from .sieve import m_chi, sieved_form_suite
from .testfun import Transforms, build_test_pair
from .trace import (artin_char_filter, check_h_criterion, gamma_targets, geom_full_sieved,
                    geom_min, minimize_constrained, qform)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    N: int | None
    chi: str | None
    n: int
    delta: float | None
    M: int
    X: float | None
    eps: int
    n_artin: int
    cache: str | None
    format: str
    threads: int
    pmax: int
    emax: int
    tmax: int
    x: list[float] | None
    what: str | None
    sieved: bool

    def resolve_delta(self) -> float:
        if self.delta is None and self.X is None:
            raise UsageError("give --delta or --X")
        if self.delta is None:
            return self.X / (2 * self.M)
        if self.X is not None and abs(self.X - 2 * self.M * self.delta) > 1e-12:
            raise UsageError(f"--X {self.X} is not 2*M*delta = {2 * self.M * self.delta}")
        return self.delta


def parse_chi(text: str | None, N: int | None) -> DirichletChar:
    if text is None:
        raise UsageError("--chi is required")
    if text == "trivial":
        if N is None:
            raise UsageError("--chi trivial needs --N")
        return DirichletChar.trivial(N)
    if text == "legendre":
        if N is None:
            raise UsageError("--chi legendre needs --N")
        pp = prime_power(N)
        if pp is None or pp[0] == 2:
            raise UsageError("--chi legendre needs --N a power of an odd prime")
        p, e = pp
        return DirichletChar(N, [legendre(p).induce(e)])
    try:
        chi = DirichletChar.from_literal(text)
    except ValueError as exc:
        raise UsageError(f"bad --chi {text!r}: {exc}") from None
    if N is not None and chi.N != N:
        raise UsageError(f"--chi modulus {chi.N} differs from --N {N}")
    return chi


def _test_pair(cfg: RunConfig):
    delta = cfg.resolve_delta()
    x = cfg.x if cfg.x is not None else [1.0 / cfg.M] * cfg.M
    if len(x) != cfg.M:
        raise UsageError(f"--x has {len(x)} entries, --M is {cfg.M}")
    return build_test_pair(delta, x)


def _classes(cfg: RunConfig) -> ClassCache:
    return ClassCache(cfg.cache) if cfg.cache else ClassCache()


def _emit(rows, cfg: RunConfig, out) -> None:
    if cfg.format == "json":
        out.write(json.dumps(rows, indent=2, default=_jsonable) + "\n")
        return
    rows = rows if isinstance(rows, list) else [rows]
    flat = [_flatten(r) for r in rows]
    keys = []
    for r in flat:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in flat:
        w.writerow(r)
    out.write(buf.getvalue())


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = json.dumps(v, default=_jsonable) if isinstance(v, list) else v
    return out


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, complex):
        return [v.real, v.imag]
    return str(v)


def _is_square(D: int) -> bool:
    return D >= 0 and math.isqrt(D) ** 2 == D


def _cplx(v) -> float | list[float]:
    v = complex(v)
    return v.real if abs(v.imag) < 1e-12 else [v.real, v.imag]


def _pmap(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# commands -------------------------------------------------------------------------

def cmd_local_factor(cfg: RunConfig, out) -> int:
    chi = parse_chi(cfg.chi, cfg.N)
    if not is_minimal(chi):
        raise UsageError(f"{chi.to_literal()} is not minimal")
    rows = []
    for c in chi.locals:
        row = {"p": c.p, "e": c.e, "s": c.s, "order": c.order,
               "M": str(ld.bigM(c)), "mu": ld.mu_const(c),
               "Psi_n": _cplx(ld.psi_parabolic(c, cfg.n)), "Phi_1n": _cplx(ld.phi_mn(c, 1, cfg.n)),
               "H_tn": {}}
        for t in range(-cfg.tmax, cfg.tmax + 1):
            D = t * t - 4 * cfg.n
            if _is_square(D):
                continue
            row["H_tn"][str(t)] = _cplx(ld.H_tn(c, t, cfg.n))
        rows.append(row)
    _emit({"chi": chi.to_literal(), "n": cfg.n, "locals": rows}, cfg, out)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, out) -> int:
    if cfg.what == "omega":
        if cfg.N is None or prime_power(cfg.N) is None:
            raise UsageError("oracle omega needs --N a prime power")
        p, a = prime_power(cfg.N)
        bad = [t for t in range(-cfg.tmax, cfg.tmax + 1)
               if not _is_square(t * t - 4 * cfg.n)
               and not omega_closedform_check(p, a, cfg.n, t)]
        _emit({"p": p, "alpha": a, "n": cfg.n, "tmax": cfg.tmax, "mismatches": bad}, cfg, out)
        return EXIT_FAIL if bad else EXIT_OK
    if cfg.what == "sp":
        chi = parse_chi(cfg.chi, cfg.N)
        worst, checked = 0.0, 0
        for c in chi.locals:
            for t in range(-cfg.tmax, cfg.tmax + 1):
                if _is_square(t * t - 4 * cfg.n):
                    continue
                worst = max(worst, abs(complex(ld.S_p(c, t, cfg.n)) - complex(S_p_direct(c, t, cfg.n))))
                checked += 1
        ok = worst <= 1e-9
        _emit({"chi": chi.to_literal(), "n": cfg.n, "checked": checked, "max_error": worst,
               "ok": ok}, cfg, out)
        return EXIT_OK if ok else EXIT_FAIL
    raise UsageError("oracle needs a target: omega or sp")


def cmd_sieve_verify(cfg: RunConfig, out) -> int:
    primes = tuple(primes_upto(cfg.pmax))
    rep = sieved_form_suite(primes, cfg.emax, max(cfg.emax, min(cfg.emax + 2, 6)))
    _emit({"primes": list(primes), "emax": cfg.emax, "checked": rep.checked,
           "failures": [str(f) for f in rep.failures[:20]], "ok": rep.ok}, cfg, out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_trace(cfg: RunConfig, out) -> int:
    chi = parse_chi(cfg.chi, cfg.N)
    T = Transforms(_test_pair(cfg))
    classes = _classes(cfg)
    b = geom_min(chi, cfg.n, T, classes=classes)
    res = b.to_dict()
    code = EXIT_OK
    if cfg.sieved:
        s = geom_full_sieved(chi, cfg.n, T, classes=classes)
        diff = abs(s.total - b.total)
        ok = diff <= 1e-6 * (1 + abs(b.total))
        res["sieved"] = {"total": s.total, "terms": s.to_dict()["terms"], "abs_diff": diff, "ok": ok}
        code = EXIT_OK if ok else EXIT_FAIL
    _emit(res, cfg, out)
    return code


def _qform_row(args):
    return _qform_eval(*args)[0]


def _qform_eval(lit, eps, delta, M, n_artin):
    chi = DirichletChar.from_literal(lit)
    A = qform(chi, eps, delta, M, n_artin)
    row = {"chi": lit, "eps": eps, "m_chi": A.m_chi, "n_artin": n_artin,
           "min_eig": A.min_eig(), "norm": float(np.linalg.norm(A.A, 2))}
    try:
        mz = minimize_constrained(A)
    except np.linalg.LinAlgError as exc:
        row.update({"Q_min": None, "verdict": f"ill-conditioned: {exc}"})
        return row, A
    crit = check_h_criterion(mz.x, delta)
    row.update({"Q_min": mz.Q, "Q_uniform": mz.Q_uniform, "x": mz.x.tolist(),
                "Q_below_1": bool(mz.Q < 1), "h_iy_min": crit.min_value, "h_iy_ge_1": crit.holds})
    return row, A


def cmd_qform(cfg: RunConfig, out) -> int:
    chi = parse_chi(cfg.chi, cfg.N)
    delta = cfg.resolve_delta()
    row, A = _qform_eval(chi.to_literal(), cfg.eps, delta, cfg.M, cfg.n_artin)
    row["A"] = A.A.tolist()
    _emit(row, cfg, out)
    psd = row["min_eig"] >= -1e-8 * max(row["norm"], 1e-300) or cfg.n_artin > 0
    return EXIT_OK if psd else EXIT_FAIL


def _scan(cfg: RunConfig, chars, out) -> int:
    delta = cfg.resolve_delta()
    jobs = [(c.to_literal(), eps, delta, cfg.M, cfg.n_artin) for c in chars for eps in (0, 1)]
    rows = _pmap(_qform_row, jobs, cfg.threads)
    for r in rows:
        r.pop("x", None)
    _emit(rows, cfg, out)
    return EXIT_OK


def cmd_scan_gamma(cfg: RunConfig, out) -> int:
    if cfg.N is None:
        raise UsageError("scan-gamma needs --N")
    return _scan(cfg, [chi for _, chi in gamma_targets(cfg.N)], out)


def cmd_scan_artin(cfg: RunConfig, out) -> int:
    if cfg.N is None:
        raise UsageError("scan-artin needs --N")
    return _scan(cfg, artin_char_filter(cfg.N), out)


def cmd_cache(cfg: RunConfig, out) -> int:
    X = cfg.X if cfg.X is not None else 12.0
    tmax = int(math.exp(X / 2) + math.exp(-X / 2)) + 1
    bound = max(DEFAULT_BOUND, tmax * tmax + 4)
    classes = ClassCache(cfg.cache, bound=bound) if cfg.cache else ClassCache(bound=bound)
    before = len(classes)
    if cfg.what in (None, "fill"):
        for t in range(tmax + 1):
            for n in (1, -1):
                D = t * t - 4 * n
                disc = split_fundamental(D) if D != 0 else None
                if disc is None or disc.is_square or disc.d < 0:
                    continue
                classes.get(disc.d)
    elif cfg.what != "info":
        raise UsageError("cache takes 'fill' (default) or 'info'")
    _emit({"path": str(classes.path), "bound": bound, "records_before": before,
           "records": len(classes)}, cfg, out)
    return EXIT_OK


COMMANDS = {
    "local-factor": cmd_local_factor,
    "oracle": cmd_oracle,
    "sieve-verify": cmd_sieve_verify,
    "trace": cmd_trace,
    "qform": cmd_qform,
    "scan-gamma": cmd_scan_gamma,
    "scan-artin": cmd_scan_artin,
    "cache": cmd_cache,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistmin", description="Twist-minimal trace formula toolkit.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("what", nargs="?", default=None,
                    help="oracle: omega | sp; cache: fill | info")
    ap.add_argument("--N", type=int, help="level")
    ap.add_argument("--chi", help="'trivial', 'legendre' or a literal N:e1,e2,...")
    ap.add_argument("--n", type=int, default=1, choices=(1, -1), help="Hecke index, 1 or -1")
    ap.add_argument("--M", type=int, default=8, help="number of cosine coefficients")
    ap.add_argument("--delta", type=float, help="grid step of g")
    ap.add_argument("--X", type=float, help="support of g, 2*M*delta")
    ap.add_argument("--x", type=_floats, help="coefficients x_0..x_{M-1} (default uniform)")
    ap.add_argument("--eps", type=int, default=0, choices=(0, 1), help="parity under T_{-1}")
    ap.add_argument("--n-artin", dest="n_artin", type=int, default=0,
                    help="count subtracted at h(0)")
    ap.add_argument("--cache", help="class-data cache path (default $TWISTMIN_CACHE)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--pmax", type=int, default=13, help="largest prime for sieve-verify")
    ap.add_argument("--emax", type=int, default=4, help="largest exponent for sieve-verify")
    ap.add_argument("--tmax", type=int, default=40, help="|t| range for oracle and local-factor")
    ap.add_argument("--sieved", action="store_true", help="trace: also assemble the sieved full side")
    return ap


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = RunConfig(**vars(ns))
    try:
        return COMMANDS[cfg.command](cfg, out)
    except UsageError as exc:
        print(f"twistmin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheBoundError as exc:
        print(f"twistmin: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"twistmin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
