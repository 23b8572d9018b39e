"""soliton-lab command line.

Usage:
    soliton-lab curvature --profile family --n 4 --A -1 --k2 1 --rmin 0.5 --rmax 2
    soliton-lab verify-soliton --n 4 --rho 0.5
    soliton-lab family --n 4 --A 1 --k2 1
    soliton-lab rigidity-scan --n 4 --A 0 --k2 1
    soliton-lab completeness --n 4 --A 1 --k2 1 --reference cylinder
    soliton-lab kazdan --n 3
    soliton-lab oracle-compare --profile cylinder --n 4 --signature +++-

Every subcommand writes one JSON (default) or CSV report to stdout or
``--out`` and exits 0 exactly when all of its verdicts pass. Settings may
also come from ``--config file.json``; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable

import mpmath
import numpy as np

from . import __version__
from .completeness import certify, certify_chain, family_cylinder_closed_form
from .errors import ConfigError, SolitonLabError
from .families import (
    NEGATIVE_VARIANTS,
    ZeroCurvatureFamily,
    bernoulli_rhs,
    cylinder_profile,
    kazdan_negative_profile,
    kazdan_triple,
    log_derivative,
    negative_leg_curvature,
    negative_leg_curvature_alternatives,
    sample_curvature,
)
from .fd_oracle import agree, conformally_flat_metric, fd_scalar_curvature
from .geometry import (
    RadialProfile,
    Signature,
    constant_profile,
    linear_profile,
    point_with_invariant,
    radial_scalar_curvature,
    scalar_curvature,
)
from .report import Report
from .soliton import (
    SolitonParams,
    classify,
    gaussian_potential_profile,
    ode_residual,
    pde_residual,
    rigidity_scan,
)

COMMANDS = (
    "curvature",
    "verify-soliton",
    "family",
    "rigidity-scan",
    "completeness",
    "kazdan",
    "oracle-compare",
)
PROFILES = ("family", "cylinder", "negative", "linear")
DEFAULT_TOL = {
    "curvature": 1e-8,
    "verify-soliton": 1e-10,
    "family": 1e-8,
    "rigidity-scan": 1e-9,
    "completeness": 1e-9,
    "kazdan": 1e-8,
    "oracle-compare": 1e-4,
}


@dataclass
class RunConfig:
    command: str
    n: int = 4
    signature: str | None = None
    profile: str = "family"
    A: float = 1.0
    k2: float = 1.0
    rho: float = 0.0
    lam: float = 0.0
    potential: str = "constant"
    rmin: float = 0.1
    rmax: float = 10.0
    count: int = 32
    spacing: str = "log"
    tol: float | None = None
    reference: str = "cylinder"
    variant: str = "half-power"
    dps: int = 0
    out: str | None = None
    format: str = "json"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigError(f"n must be an integer >= 3, got {self.n}")
        if not self.rmin > 0:
            raise ConfigError(f"grid minimum must be positive, got {self.rmin}")
        if not self.rmax > self.rmin:
            raise ConfigError(f"grid maximum {self.rmax} must exceed minimum {self.rmin}")
        if self.dps < 0:
            raise ConfigError(f"dps must be 0 (double precision) or positive, got {self.dps}")
        if self.count < 2:
            raise ConfigError(f"grid count must be at least 2, got {self.count}")
        if self.spacing not in ("log", "linear"):
            raise ConfigError(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be 'json' or 'csv', got {self.format!r}")
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {PROFILES}, got {self.profile!r}")
        if self.potential not in ("constant", "gaussian"):
            raise ConfigError(f"potential must be 'constant' or 'gaussian', got {self.potential!r}")
        if self.variant not in NEGATIVE_VARIANTS:
            raise ConfigError(f"variant must be one of {NEGATIVE_VARIANTS}")
        if self.reference not in ("cylinder", "family"):
            raise ConfigError(f"reference must be 'cylinder' or 'family', got {self.reference!r}")
        if not self.k2 > 0:
            raise ConfigError(f"k2 must be positive, got {self.k2}")
        for name in ("A", "rho", "lam"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")
        try:
            sig = self.sig()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if sig.n != self.n:
            raise ConfigError(f"signature {self.signature!r} has length {sig.n}, n is {self.n}")

    def sig(self) -> Signature:
        if self.signature is None:
            return Signature.riemannian(self.n)
        return Signature.parse(self.signature)

    def tolerance(self) -> float:
        return DEFAULT_TOL[self.command] if self.tol is None else self.tol

    def grid(self) -> list[float]:
        if self.spacing == "log":
            pts = np.geomspace(self.rmin, self.rmax, self.count)
        else:
            pts = np.linspace(self.rmin, self.rmax, self.count)
        return [float(r) for r in pts]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "command" not in data:
            raise ConfigError("config is missing 'command'")
        return cls(**data)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _threads() -> int:
    raw = os.environ.get("SOLITON_LAB_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _map(fn: Callable, items: list) -> list:
    """Order-preserving map, parallel when SOLITON_LAB_THREADS > 1."""
    workers = _threads()
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _profile(cfg: RunConfig) -> RadialProfile:
    if cfg.profile == "family":
        return ZeroCurvatureFamily(cfg.A, cfg.k2, cfg.n).profile()
    if cfg.profile == "cylinder":
        return cylinder_profile()
    if cfg.profile == "negative":
        return kazdan_negative_profile(cfg.n, cfg.variant)
    return linear_profile(cfg.k2)


def _base(cfg: RunConfig) -> Report:
    config = cfg.to_dict()
    config["grid"] = cfg.grid()
    config["tolerance"] = cfg.tolerance()
    return Report(cfg.command, config)


def _kind(exc: Exception) -> str:
    return type(exc).__name__


def _family_note(cfg: RunConfig) -> dict:
    ss = ZeroCurvatureFamily(cfg.A, cfg.k2, cfg.n).singular_set()
    return {"has_origin": ss.has_origin, "sphere_radius": ss.sphere_radius, "sphere_r": ss.sphere_r}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_curvature(cfg: RunConfig) -> Report:
    """Scalar curvature of a profile on the grid, optionally at ``dps`` decimal digits."""
    rep = _base(cfg)
    prof, sig, tol = _profile(cfg), cfg.sig(), cfg.tolerance()

    def one(r):
        try:
            p = point_with_invariant(r, sig)
            if cfg.dps:
                p = [mpmath.mpf(float(x)) for x in p]
            return r, float(scalar_curvature(prof, sig, p)), None
        except SolitonLabError as exc:
            return r, None, exc

    ks = []
    with mpmath.workdps(cfg.dps or mpmath.mp.dps):
        results = _map(one, cfg.grid())
    for r, k, exc in results:
        if exc is not None:
            rep.error(r, _kind(exc), str(exc))
            continue
        rep.values.append({"r": r, "K": k})
        ks.append(k)

    if cfg.profile == "family":
        note = _family_note(cfg)
        rep.verdict("singular set", True, f"sphere at r={note['sphere_r']}", **note)
    if not ks:
        rep.verdict("evaluated points", False, "no admissible grid point")
        return rep
    if cfg.profile in ("family", "linear"):
        err = max(abs(k) for k in ks)
        rep.verdict("zero curvature", err < tol, f"max |K| = {err:.3e}", max_abs=err)
    elif cfg.profile == "cylinder":
        target = (cfg.n - 1) * (cfg.n - 2)
        err = max(abs(k - target) for k in ks)
        rep.verdict("constant curvature", err < tol, f"max |K - {target}| = {err:.3e}", max_abs=err)
    else:
        top = max(ks)
        rep.verdict("negative curvature", top < 0, f"max K = {top:.6e}", max_K=top)
    return rep


def _potential(cfg: RunConfig) -> RadialProfile:
    if cfg.potential == "gaussian":
        return gaussian_potential_profile(cfg.k2, cfg.lam)
    return constant_profile(0.0)


def cmd_verify_soliton(cfg: RunConfig) -> Report:
    """Soliton residuals for the chosen profile with a constant or Gaussian potential."""
    rep = _base(cfg)
    sig, tol = cfg.sig(), cfg.tolerance()
    sp = SolitonParams(cfg.n, cfg.rho, cfg.lam, sig)
    psi = _profile(cfg)
    h = _potential(cfg)
    worst = 0.0
    for r in cfg.grid():
        try:
            pde = pde_residual(psi, h, sp, point_with_invariant(r, sig))
            e1, e2 = ode_residual(psi, h, sp, r)
        except SolitonLabError as exc:
            rep.error(r, _kind(exc), str(exc))
            continue
        row = {
            "r": r,
            "offdiag_max": pde.offdiag_max,
            "diag_max": pde.diag_max,
            "ode_first": e1,
            "ode_second": e2,
        }
        rep.values.append(row)
        worst = max(worst, pde.offdiag_max, pde.diag_max, abs(e1), abs(e2))
    label = str(classify(sp))
    ok = bool(rep.values) and worst < tol
    rep.verdict(
        "soliton residuals", ok, f"max residual {worst:.3e} ({label})", max_residual=worst,
        classification=label, psi=psi.name, potential=h.name,
    )
    return rep


def cmd_family(cfg: RunConfig) -> Report:
    rep = _base(cfg)
    fam = ZeroCurvatureFamily(cfg.A, cfg.k2, cfg.n)
    prof, tol = fam.profile(), cfg.tolerance()
    note = _family_note(cfg)
    rep.verdict("singular set", True, f"sphere radius {note['sphere_radius']}", **note)
    kmax = bmax = 0.0
    for r in cfg.grid():
        try:
            j = prof(r)
        except SolitonLabError as exc:
            rep.error(r, _kind(exc), str(exc))
            continue
        y, dy = log_derivative(j)
        k = radial_scalar_curvature(prof, cfg.n, r)
        gap = abs(dy - bernoulli_rhs(cfg.n, r, y))
        kmax, bmax = max(kmax, abs(k)), max(bmax, gap)
        rep.values.append(
            {"r": r, "psi": j.v, "dpsi": j.d1, "d2psi": j.d2, "y": y, "bernoulli_gap": gap, "K": k}
        )
    have = bool(rep.values)
    rep.verdict("zero curvature", have and kmax < tol, f"max |K| = {kmax:.3e}", max_abs=kmax)
    rep.verdict("bernoulli", have and bmax < 1e-8, f"max |y' - rhs| = {bmax:.3e}", max_gap=bmax)
    return rep


def cmd_rigidity(cfg: RunConfig) -> Report:
    rep = _base(cfg)
    v = rigidity_scan(cfg.A, cfg.k2, cfg.n, cfg.grid(), tol=cfg.tolerance())
    ode = dict(v.ode_lambda_samples)
    poly = dict(v.polynomial_samples)
    for r, lam in v.lambda_samples:
        rep.values.append({"r": r, "lambda": lam, "ode_lambda": ode.get(r), "polynomial": poly[r]})
    for r, why in v.skipped:
        rep.error(r, "skipped", why)
    expected = cfg.A == 0
    rep.verdict(
        "rigidity",
        v.is_constant == expected,
        "lambda constant iff A = 0",
        is_constant=v.is_constant,
        forced_lambda=v.forced_lambda,
        spread=v.spread,
        polynomial_vanishes=v.polynomial_vanishes,
        ode_is_constant=v.ode_is_constant,
        ode_lambda_free=v.ode_lambda_free,
    )
    return rep


def _cert_fields(cert) -> dict:
    out = {
        "target_id": cert.target_id,
        "reference_id": cert.reference_id,
        "status": cert.status,
        "bound_c": cert.bound_c,
        "minimizer_r": cert.minimizer_r,
        "attained": cert.attained,
        "second_derivative": cert.second_derivative,
        "search_interval": cert.search_interval,
        "grid_points": cert.grid_points,
        "reason": cert.reason,
    }
    if cert.probe is not None:
        out["probe"] = {
            "end": cert.probe.end,
            "radii": cert.probe.radii,
            "values": cert.probe.values,
            "limit": cert.probe.limit,
            "gap": cert.probe.gap,
        }
    if cert.closed_form:
        out["closed_form"] = cert.closed_form
        out["closed_form_gaps"] = cert.closed_form_gaps()
    return out


def cmd_completeness(cfg: RunConfig) -> Report:
    """Certify the family against the cylinder, or the negative profile against the family."""
    rep = _base(cfg)
    fam = ZeroCurvatureFamily(cfg.A, cfg.k2, cfg.n)
    cf = family_cylinder_closed_form(cfg.A, cfg.k2, cfg.n) if cfg.A > 0 else None
    if cfg.reference == "cylinder" and cfg.profile == "family":
        certs = [certify(fam.profile(), cylinder_profile(), closed_form=cf)]
    else:
        chain = [(fam.profile(), cylinder_profile())]
        chain.append((_profile(cfg), fam.profile() if cfg.reference == "family" else cylinder_profile()))
        certs = certify_chain(chain, closed_forms=[cf, None])
    for cert in certs:
        for r, why in cert.skipped:
            rep.error(r, "skipped", why)
        rep.verdict(f"{cert.target_id} vs {cert.reference_id}", cert.certified, cert.reason,
                    **_cert_fields(cert))
    return rep


def cmd_kazdan(cfg: RunConfig) -> Report:
    rep = _base(cfg)
    n = cfg.n
    triple = kazdan_triple(n, A=cfg.A if cfg.A > 0 else 1.0, k2=cfg.k2, grid=cfg.grid())
    for leg in triple.legs:
        for r, why in leg.skipped:
            rep.error(r, "skipped", f"{leg.label}: {why}")
        rep.verdict(f"{leg.label} leg", leg.passed, leg.detail, profile=leg.profile)
    for r, k in triple.negative.samples:
        alt = negative_leg_curvature_alternatives(n, r)
        rep.values.append(
            {
                "r": r,
                "K_negative": k,
                "K_closed_form": negative_leg_curvature(n, r),
                "K_weighted": alt["weighted"],
                "K_grouped": alt["grouped"],
            }
        )
    swapped, _ = sample_curvature(kazdan_negative_profile(n, "swapped"), n, cfg.grid())
    top = max(k for _, k in swapped)
    rep.verdict(
        "swapped variant (informational)", True,
        f"max K = {top:.6e}; negative everywhere: {top < 0}", negative_everywhere=top < 0,
    )
    fam = ZeroCurvatureFamily(1.0, 1.0, n).profile()
    cert = certify(kazdan_negative_profile(n), fam, {"cylinder", fam.name})
    gap = abs(cert.bound_c - math.e)
    rep.verdict(
        "negative leg bound", cert.certified and gap <= cfg.tolerance() * math.e,
        f"|c - e| = {gap:.3e}", **_cert_fields(cert),
    )
    return rep


def cmd_oracle_compare(cfg: RunConfig) -> Report:
    rep = _base(cfg)
    prof, sig = _profile(cfg), cfg.sig()
    metric = conformally_flat_metric(
        sig.eps, lambda r: float(prof.value(r)), prof.singular_r, name=prof.name
    )

    def one(r):
        try:
            p = point_with_invariant(r, sig)
            closed = scalar_curvature(prof, sig, p)
            return r, closed, fd_scalar_curvature(metric, p), None
        except SolitonLabError as exc:
            return r, None, None, exc

    bad = 0
    for r, closed, fd, exc in _map(one, cfg.grid()):
        if exc is not None:
            rep.error(r, _kind(exc), str(exc))
            continue
        ok = agree(closed, fd, rel=cfg.tolerance(), abs_tol=1e-6)
        bad += not ok
        rep.values.append({"r": r, "K_closed": closed, "K_fd": fd, "agree": ok})
    rep.verdict(
        "closed form vs finite differences", bool(rep.values) and bad == 0,
        f"{len(rep.values) - bad}/{len(rep.values)} points agree",
    )
    return rep


HANDLERS = {
    "curvature": cmd_curvature,
    "verify-soliton": cmd_verify_soliton,
    "family": cmd_family,
    "rigidity-scan": cmd_rigidity,
    "completeness": cmd_completeness,
    "kazdan": cmd_kazdan,
    "oracle-compare": cmd_oracle_compare,
}


def run(cfg: RunConfig) -> Report:
    cfg.validate()
    return HANDLERS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="soliton-lab",
        description="Curvature, soliton and completeness checks for radial conformal metrics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or "").split("\n")[0] or None)
        # defaults are None so that --config values survive unless overridden
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--signature", default=None, help="e.g. +++- (default all +)")
        p.add_argument("--profile", choices=PROFILES, default=None)
        p.add_argument("--A", type=float, default=None)
        p.add_argument("--k2", type=float, default=None)
        p.add_argument("--rho", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--potential", choices=("constant", "gaussian"), default=None)
        p.add_argument("--rmin", type=float, default=None)
        p.add_argument("--rmax", type=float, default=None)
        p.add_argument("--count", type=int, default=None)
        p.add_argument("--spacing", choices=("log", "linear"), default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--reference", choices=("cylinder", "family"), default=None)
        p.add_argument("--variant", choices=NEGATIVE_VARIANTS, default=None)
        p.add_argument("--dps", type=int, default=None, help="decimal digits for curvature (0 = double)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default=None)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data.pop("grid", None)
        data.pop("tolerance", None)
    data["command"] = args.command
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if f.name != "command" and value is not None:
            data[f.name] = value
    return RunConfig.from_dict(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        rep = run(cfg)
    except (ConfigError, TypeError) as exc:
        print(f"soliton-lab: configuration error: {exc}", file=sys.stderr)
        return 2
    text = rep.render(cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
