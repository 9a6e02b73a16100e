"""Command-line front end.

Every command writes one JSON report (to ``--report`` or stdout) holding
the resolved configuration, the library version and the results.  Exit
status is 0 when every check passes, 2 on a numerical failure (failed
check, singular system, non-positive Gram matrix, ...) and 1 on usage
errors.  ``WELDLAB_THREADS`` caps the worker pool.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .diffeo import TangentVector, invert, make_diffeo
from .errors import WeldlabError
from .parallel import pmap, threads
from .report import Report, _plain

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    gamma_spec: str = None
    pair: str = None
    K: int = 64
    M: int = 0
    n_list: list = field(default_factory=lambda: [1, 2, 3])
    tolerances: dict = field(default_factory=lambda: {
        "identity_residual": None, "ladder": 1e-7, "gradient_rel": 1e-4, "index_rel": 1e-5})
    seed: int = 0
    output: str = None
    report: str = None
    force: bool = False
    mode: int = 2
    amplitude: float = 0.02
    steps: list = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    trials: int = 100
    cross_check: str = None

    def grid(self, spec=None):
        """Explicit M, else the spec's M, else the power of two >= 8K."""
        if self.M:
            return int(self.M)
        if spec and spec.get("M"):
            return int(spec["M"])
        return 1 << int(np.ceil(np.log2(max(8 * self.K, 64))))


def _parse_ints(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def _parse_floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _read_json(path):
    if not path:
        raise UsageError("missing input file")
    if not os.path.exists(path):
        raise UsageError(f"no such file: {path}")
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _gamma(cfg):
    spec = _read_json(cfg.gamma_spec)
    if "kind" not in spec:
        raise UsageError("diffeo spec needs a 'kind'")
    try:
        return make_diffeo(spec, cfg.grid(spec)), spec
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad diffeo spec: {exc}") from exc


def _pair(cfg):
    from .welding import WeldingPair, weld

    if cfg.pair:
        return WeldingPair.from_json(_read_json(cfg.pair))
    gamma, _ = _gamma(cfg)
    return weld(gamma, max(cfg.K, 2 * cfg.K))


def _retol(rep, tol):
    if tol is None:
        return rep
    for c in rep.checks.values():
        if c["mode"] == "below":
            c["tol"] = float(tol)
            c["pass"] = bool(np.isfinite(c["residual"]) and c["residual"] < tol)
    return rep


# ---------------------------------------------------------------------------
# commands; each returns (payload dict, passed)


def cmd_weld(cfg):
    from .welding import weld

    gamma, spec = _gamma(cfg)
    p = weld(gamma, cfg.K)
    if cfg.output:
        _write(cfg.output, p.to_json(), cfg.force)
    tails = {"a_K": float(abs(p.a[-1])), "b_-K": float(abs(p.b[-1]))}
    rep = Report("weld")
    rep.values.update({"boundary_residual": p.residual, "condition": p.condition, "tails": tails,
                       "r": [p.r.real, p.r.imag], "info": p.info})
    if not cfg.output:
        rep.values["pair"] = p.to_json()
    rep.check("univalence_winding", abs(p.info["univalence_winding"]), 0.5)
    return rep


def cmd_pi(cfg):
    from .pi import verify_pi_identities

    gamma, _ = _gamma(cfg)
    gi = invert(gamma)
    reps = pmap(lambda n: verify_pi_identities(gamma, n, cfg.K, gamma_inv=gi), cfg.n_list)
    out = Report(f"pi(K={cfg.K})")
    for n, r in zip(cfg.n_list, reps):
        out.merge(r, prefix=f"n={n}/")
    return _retol(out, cfg.tolerances.get("identity_residual"))


def cmd_faber(cfg):
    from .faber import coefficient_matrices, frak_a_from_kernel, transition_matrices

    p = _pair(cfg)
    out = Report(f"faber(K={cfg.K})")
    for n in cfg.n_list:
        mats = coefficient_matrices(p, n, cfg.K)
        tr = transition_matrices(p, n, cfg.K, mats)
        out.merge(tr["report"], prefix=f"n={n}/")
        out.check(f"n={n}/A[1-n]=D[n]^T", np.abs(mats["A[1-n]"].data - mats["D[n]"].data.T).max(), 1e-10)
        out.check(f"n={n}/D[1-n]=A[n]^T", np.abs(mats["D[1-n]"].data - mats["A[n]"].data.T).max(), 1e-10)
        out.check(f"n={n}/frakA=frakD^T", np.abs(mats["frakA[n]"].data - mats["frakD[n]"].data.T).max(), 1e-10)
        if cfg.cross_check == "kernel":
            k = min(cfg.K, 32)
            ker = frak_a_from_kernel(p, n, k)
            out.check(f"n={n}/kernel_cross_check",
                      np.abs(ker.data - mats["frakA[n]"].data[:k - n + 1, :k - n + 1]).max(), 1e-9)
        if cfg.output:
            os.makedirs(cfg.output, exist_ok=True)
            mats = dict(mats, **{"frakP_division[n]": tr["P"], "frakM_division[n]": tr["M"]})
            for name, X in sorted(mats.items()):
                _write(os.path.join(cfg.output, f"n{n}_{_safe(name)}.json"), X.to_json(), cfg.force)
    return _retol(out, cfg.tolerances.get("identity_residual"))


def cmd_fn(cfg):
    from .spectra import f_n

    gamma, _ = _gamma(cfg)
    ladder = _ladder(cfg.K)
    tol = cfg.tolerances.get("ladder", 1e-7)
    pairs = [(n, w) for n in cfg.n_list for w in (n, 1 - n)]
    res = pmap(lambda nw: f_n(gamma, nw[1], ladder=ladder, tol=tol), pairs)
    out = Report(f"fn(K={cfg.K})")
    by = dict(zip(pairs, res))
    for n in cfg.n_list:
        a, b = by[(n, n)], by[(n, 1 - n)]
        out.values[f"F_{n}"] = a.to_json()
        out.values[f"F_{1 - n}"] = b.to_json()
        out.check(f"ladder_converged[n={n}]", abs(a.logdets[-1] - a.logdets[-2]) if len(a.logdets) > 1 else 0.0, tol)
        out.check(f"weight_routes[n={n}]", abs(a.extrapolated - b.extrapolated), tol)
    return out


def cmd_index_check(cfg):
    from .spectra import index_check, wp_potential_quadrature
    from .welding import weld

    gamma, spec = _gamma(cfg)
    pair = weld(gamma, max(64, 2 * cfg.K))
    ns = [n for n in cfg.n_list]
    rep = index_check(gamma, ns, cfg.K, pair=pair, tol=cfg.tolerances.get("index_rel", 1e-5))
    quad = wp_potential_quadrature(pair)
    rep.values["S_quadrature"] = quad.to_json()
    S = rep.values["S"]["total"]
    rep.check("S_quadrature_agreement", abs(quad.total - S), 1e-6)
    payload = {
        "gamma": spec,
        "K_ladder": sorted(set([cfg.K // 2, cfg.K])),
        "F_n": {f"n={n}": rep.values[f"n={n}"]["F_n"] for n in ns},
        "logdet_N": {f"n={n}": rep.values[f"n={n}"]["logdet_N"] for n in ns},
        "S": rep.values["S"],
        "S_quadrature": rep.values["S_quadrature"],
        "index_errors": {f"n={n}": rep.residual(f"index_error[n={n}]") for n in ns},
        "potential_errors": {f"n={n}": rep.residual(f"potential_error[n={n}]") for n in ns},
        "identities": {k: c["residual"] for k, c in rep.checks.items()},
        "checks": rep.checks,
        "pass": rep.passed,
    }
    return payload, rep.passed


def cmd_grad_check(cfg):
    from .spectra import derivative_check
    from .welding import weld

    gamma, _ = _gamma(cfg)
    v = TangentVector.single(cfg.mode, cfg.amplitude)
    pair = weld(gamma, max(64, cfg.K))
    reps = pmap(lambda n: derivative_check(gamma, v, n, steps=cfg.steps, K=cfg.K, pair=pair,
                                           rel_tol=cfg.tolerances.get("gradient_rel", 1e-4)), cfg.n_list)
    out = Report(f"grad_check(K={cfg.K})")
    for n, r in zip(cfg.n_list, reps):
        out.merge(r, prefix=f"n={n}/")
    return out


def cmd_grunsky_check(cfg):
    from .faber import grunsky_n1
    from .welding import weld

    out = Report("grunsky_check")
    if cfg.pair:
        p = _pair(cfg)
        res = grunsky_n1(p, cfg.K)
        out.check(f"equality_residual[K={cfg.K}]", res["equality_residual"], 1e-8)
        return out
    gamma, _ = _gamma(cfg)
    vals = []
    for K in (cfg.K, 2 * cfg.K):
        res = grunsky_n1(weld(gamma, K), K, interior=min(32, K // 2))
        vals.append(res["equality_residual"])
        out.check(f"equality_residual[K={K}]", res["equality_residual"], 1e-8)
    out.values["shrink_factor"] = vals[0] / vals[1] if vals[1] > 0 else float("inf")
    return out


def cmd_appendix_check(cfg):
    from .spectra import appendix_checks

    p = _pair(cfg)
    ns = [n for n in cfg.n_list if n >= 2]
    if not ns:
        raise UsageError("appendix-check needs some n >= 2")
    reps = pmap(lambda n: appendix_checks(p, n, trials=cfg.trials, seed=cfg.seed + n), ns)
    out = Report("appendix_check")
    for n, r in zip(ns, reps):
        out.merge(r, prefix=f"n={n}/")
    return out


COMMANDS = {
    "weld": cmd_weld,
    "pi": cmd_pi,
    "faber": cmd_faber,
    "fn": cmd_fn,
    "index-check": cmd_index_check,
    "grad-check": cmd_grad_check,
    "grunsky-check": cmd_grunsky_check,
    "appendix-check": cmd_appendix_check,
}


# ---------------------------------------------------------------------------


def _ladder(K):
    ks = [K]
    while ks[-1] // 2 >= 16 and len(ks) < 3:
        ks.append(ks[-1] // 2)
    return sorted(ks)


def _safe(name):
    return name.replace("[", "_").replace("]", "").replace("-", "m").replace("*", "star")


def _dumps(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _write(path, obj, force=False):
    if os.path.exists(path) and not force:
        raise UsageError(f"refusing to overwrite {path} (use --force)")
    with open(path, "w") as fh:
        fh.write(_dumps(obj))


def build_parser():
    ap = argparse.ArgumentParser(prog="weldlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"weldlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file whose keys override the flags")
        sp.add_argument("--gamma", dest="gamma_spec", help="diffeo spec JSON")
        sp.add_argument("--pair", help="welding pair JSON (from `weld --out`)")
        sp.add_argument("--K", type=int, default=None)
        sp.add_argument("--M", type=int, default=None, help="grid size; 0 picks 8K rounded up to a power of two")
        sp.add_argument("--n", dest="n_list", default=None, help="comma-separated weights")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", dest="output", default=None)
        sp.add_argument("--report", default=None)
        sp.add_argument("--force", action="store_true", help="allow overwriting outputs")
        sp.add_argument("--tol", type=float, default=None, help="identity residual tolerance")
        if name == "grad-check":
            sp.add_argument("--mode", type=int, default=None)
            sp.add_argument("--amplitude", type=float, default=None)
            sp.add_argument("--steps", default=None)
        if name == "appendix-check":
            sp.add_argument("--trials", type=int, default=None)
        if name == "faber":
            sp.add_argument("--cross-check", dest="cross_check", choices=["kernel"], default=None)
    return ap


def resolve_config(args):
    cfg = RunConfig()
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config", "tol")}
    if "n_list" in flags:
        flags["n_list"] = _parse_ints(flags["n_list"])
    if "steps" in flags:
        flags["steps"] = _parse_floats(flags["steps"])
    for k, v in flags.items():
        if k == "force" and v is False:
            continue
        setattr(cfg, k, v)
    if args.tol is not None:
        cfg.tolerances["identity_residual"] = args.tol
    if args.config:
        over = _read_json(args.config)
        for k, v in over.items():
            if k == "tolerances":
                cfg.tolerances.update(v)
            elif hasattr(cfg, k):
                setattr(cfg, k, v)
            else:
                raise UsageError(f"unknown config key {k!r}")
    if cfg.K is None or int(cfg.K) < 4:
        raise UsageError("K must be at least 4")
    cfg.K = int(cfg.K)
    if cfg.M and (int(cfg.M) & (int(cfg.M) - 1)):
        raise UsageError("M must be a power of two")
    return cfg


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    status = EXIT_OK
    doc = {"command": args.command, "version": __version__}
    try:
        cfg = resolve_config(args)
        doc["config"] = asdict(cfg)
        doc["threads"] = threads()
        result = COMMANDS[args.command](cfg)
        if isinstance(result, Report):
            payload, passed = result.to_json(), result.passed
        else:
            payload, passed = result
        doc["result"] = payload
        doc["pass"] = bool(passed)
        status = EXIT_OK if passed else EXIT_NUMERIC
    except UsageError as exc:
        doc["error"] = {"kind": "usage", "message": str(exc)}
        doc["pass"] = False
        print(f"weldlab: {exc}", file=sys.stderr)
        status = EXIT_USAGE
        cfg = None
    except WeldlabError as exc:
        doc["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        doc["pass"] = False
        status = EXIT_NUMERIC
    target = getattr(args, "report", None)
    if target and status != EXIT_USAGE:
        try:
            _write(target, doc, getattr(args, "force", False))
        except UsageError as exc:
            print(f"weldlab: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(_dumps(doc))
    return status


if __name__ == "__main__":
    sys.exit(main())
