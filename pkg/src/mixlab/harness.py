"""Scenario ingestion, run orchestration, report persistence.

A scenario JSON names a regime (inviscid, diffusive_shear, fast_oscillation),
an initial datum, a shear or flow, and the sampling times; ``run`` dispatches
to the regime's certify + evolve + check pipeline and returns one report per
certified inequality.  ``corpus_run`` executes a directory of scenarios,
writes a summary CSV plus per-scenario JSON, and fails (nonzero exit) exactly
when some scenario fails.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import averaging, certificates, inviscid, shear
from .flows import FlowSpec, ShearSpec, flow_from_json
from .reports import BoundReport
from .spectral import (
    HarmonicTerm,
    Lattice,
    SpectralField2D,
    field_from_json,
    field_from_terms,
    hneg1_norm,
    l2_norm,
    x_mode,
)

__all__ = [
    "SchemaError",
    "Scenario",
    "ScenarioReport",
    "run",
    "corpus_run",
    "write_timeseries_csv",
    "builtin_scenario",
    "BUILTIN_SCENARIOS",
]

_REGIMES = ("inviscid", "diffusive_shear", "fast_oscillation")


class SchemaError(ValueError):
    """Scenario JSON violates the schema; the message carries the field path."""


def _require(data: dict, key: str, path: str):
    if key not in data:
        raise SchemaError(f"missing field: {path}{key}")
    return data[key]


@dataclass(frozen=True)
class Scenario:
    """Validated scenario: regime-consistent fields only."""

    name: str
    regime: str
    lattice: Lattice
    rho0: SpectralField2D
    initial_terms: tuple
    shear_spec: ShearSpec | None
    flow_spec: FlowSpec | None
    nu: float | None
    A: float | None
    times: np.ndarray
    dt: float | None
    cutoff: int
    eta: float | None
    tol: float
    raw: dict

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        name = str(_require(data, "name", ""))
        regime = _require(data, "regime", "")
        if regime not in _REGIMES:
            raise SchemaError(f"invalid field: regime must be one of {_REGIMES}, got {regime!r}")
        lat = _require(data, "lattice", "")
        lattice = Lattice(int(_require(lat, "kmax", "lattice.")), int(_require(lat, "lmax", "lattice.")))
        init = _require(data, "initial_data", "")
        terms: tuple = ()
        if "terms" in init:
            terms = tuple(
                HarmonicTerm(
                    float(_require(t, "ampl", f"initial_data.terms[{i}].")),
                    int(_require(t, "kx", f"initial_data.terms[{i}].")),
                    int(_require(t, "ky", f"initial_data.terms[{i}].")),
                    t.get("kind", "cos"),
                )
                for i, t in enumerate(init["terms"])
            )
            rho0 = field_from_terms(lattice, terms)
        elif "coeffs" in init:
            rho0 = field_from_json(init)
        else:
            raise SchemaError("missing field: initial_data.terms (or initial_data.coeffs)")

        nu = data.get("nu")
        if regime == "inviscid":
            if nu is not None:
                raise SchemaError("invalid field: nu must be absent for the inviscid regime")
        else:
            if nu is None:
                raise SchemaError(f"missing field: nu (required for regime {regime})")
            nu = float(nu)

        shear_spec = None
        flow_spec = None
        if regime in ("inviscid", "diffusive_shear"):
            spec = flow_from_json(_require(data, "shear", ""))
            if not isinstance(spec, ShearSpec):
                raise SchemaError("invalid field: shear must describe a shear, not a 2D flow")
            shear_spec = spec
        else:
            spec = flow_from_json(_require(data, "flow", ""))
            if not isinstance(spec, FlowSpec):
                raise SchemaError("invalid field: flow must describe a 2D flow")
            flow_spec = spec

        A = data.get("A")
        if regime == "fast_oscillation":
            if A is None:
                raise SchemaError("missing field: A (required for regime fast_oscillation)")
            A = float(A)
        elif A is not None:
            raise SchemaError("invalid field: A only applies to the fast_oscillation regime")

        times_spec = _require(data, "times", "")
        if isinstance(times_spec, dict):
            t_max = float(_require(times_spec, "t_max", "times."))
            n = int(_require(times_spec, "n", "times."))
            times = np.linspace(0.0, t_max, n)
        else:
            times = np.asarray([float(t) for t in times_spec])
        if times.size == 0 or times[0] < 0 or np.any(np.diff(times) <= 0):
            raise SchemaError("invalid field: times must be increasing with times[0] >= 0")

        tol = float(data.get("tolerances", {}).get("margin", 1e-6))
        return cls(
            name=name,
            regime=regime,
            lattice=lattice,
            rho0=rho0,
            initial_terms=terms,
            shear_spec=shear_spec,
            flow_spec=flow_spec,
            nu=nu,
            A=A,
            times=times,
            dt=(float(data["dt"]) if data.get("dt") is not None else None),
            cutoff=int(data.get("cutoff", 16)),
            eta=(float(data["eta"]) if data.get("eta") is not None else None),
            tol=tol,
            raw=data,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class ScenarioReport:
    """All bound reports for one scenario; PASS iff every check passes."""

    name: str
    regime: str
    checks: dict[str, BoundReport]
    verdict: str
    min_margin: float
    runtime: float = 0.0
    trajectory: object = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "regime": self.regime,
            "verdict": self.verdict,
            "min_margin": self.min_margin,
            "runtime": self.runtime,
            "checks": {k: r.to_json() for k, r in sorted(self.checks.items())},
        }


def _finish(name: str, regime: str, checks: dict[str, BoundReport], t0: float, trajectory=None) -> ScenarioReport:
    ok = all(r.passed for r in checks.values())
    extras_ok = all(
        bool(v) for r in checks.values() for key, v in r.extras.items() if key.endswith("_ok")
    )
    min_margin = min((r.min_margin for r in checks.values()), default=float("inf"))
    return ScenarioReport(
        name=name,
        regime=regime,
        checks=checks,
        verdict="PASS" if (ok and extras_ok) else "FAIL",
        min_margin=min_margin,
        runtime=time.perf_counter() - t0,
        trajectory=trajectory,
    )


def run(scenario: Scenario) -> ScenarioReport:
    """Certify, evolve and check one scenario; deterministic, no randomness."""
    t0 = time.perf_counter()
    if scenario.regime == "inviscid":
        cert = inviscid.inviscid_certificate(scenario.rho0, scenario.shear_spec)
        rep = inviscid.check_inviscid_bound(
            scenario.rho0,
            scenario.shear_spec,
            cert,
            list(scenario.times),
            tol=scenario.tol,
            scenario=scenario.name,
        )
        return _finish(scenario.name, scenario.regime, {"inviscid": rep}, t0)

    if scenario.regime == "diffusive_shear":
        sh = scenario.shear_spec
        c2cert = certificates.c2_certificate(scenario.rho0, sh.M, scenario.nu)
        mixcert = certificates.mixing_certificate(scenario.rho0, sh.M, scenario.nu, c2cert.c2)
        traj = shear.evolve_shear(scenario.rho0, sh, scenario.nu, scenario.times, dt=scenario.dt)
        checks = {
            "c2_floor": certificates.check_exponential_bound(traj, c2cert, scenario.tol, scenario.name),
            "heat_ceiling": certificates.check_upper_envelope(traj, c2cert, tol=scenario.tol, scenario=scenario.name),
            "mixing_floor": certificates.check_mixing_bound(traj, mixcert, scenario.tol, scenario.name),
        }
        return _finish(scenario.name, scenario.regime, checks, t0, trajectory=traj)

    # fast_oscillation
    flow = scenario.flow_spec
    cutoff = Lattice(scenario.cutoff, scenario.cutoff)
    if scenario.initial_terms:
        rho_spec = field_from_terms(cutoff, scenario.initial_terms)
    else:
        rho_spec = scenario.rho0
    op = averaging.averaged_operator(flow, scenario.nu, cutoff)
    spectrum = averaging.detecting_spectrum(op, rho_spec)
    syl = averaging.sylvester_constant(op, spectrum)
    cert = averaging.fast_certificate(
        flow, scenario.rho0, scenario.nu, scenario.eta, spectrum, syl
    )
    traj = averaging.evolve_2d(
        scenario.rho0, flow, scenario.A, scenario.nu, scenario.times, dt=scenario.dt
    )
    rep = averaging.check_fast_bound(traj, cert, scenario.A, scenario.tol, scenario.name)
    return _finish(scenario.name, scenario.regime, {"fast_floor": rep}, t0, trajectory=traj)


def write_timeseries_csv(report: ScenarioReport, path: str | Path, kreport: int = 2) -> None:
    """Time series CSV: t, l2, hneg1, mix_scale, per-mode energies for |k| <= kreport."""
    traj = report.trajectory
    if traj is None:
        # inviscid reports carry their samples but no stored trajectory;
        # emit the sampled measured/envelope columns instead.
        rep = next(iter(report.checks.values()))
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "measured", "envelope", "margin"])
            for s in rep.samples:
                writer.writerow([s.t, s.measured, s.envelope, s.margin])
        return
    ks = [k for k in range(-kreport, kreport + 1)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "l2", "hneg1", "mix_scale"] + [f"E_{k}" for k in ks])
        for t, f in zip(traj.times, traj.fields):
            l2 = l2_norm(f)
            row = [float(t), l2, hneg1_norm(f), (hneg1_norm(f) / l2 if l2 > 0 else float("nan"))]
            for k in ks:
                if abs(k) <= f.lattice.kmax:
                    prof = x_mode(f, k)
                    row.append(float(np.sum(np.abs(prof.coeff) ** 2)))
                else:
                    row.append(0.0)
            writer.writerow(row)


BUILTIN_SCENARIOS: dict[str, dict] = {
    "heat_cosy": {
        "name": "heat_cosy",
        "regime": "diffusive_shear",
        "lattice": {"kmax": 2, "lmax": 4},
        "initial_data": {"terms": [{"ampl": 1.0, "kx": 0, "ky": 1, "kind": "cos"}]},
        "shear": "zero",
        "nu": 0.1,
        "times": {"t_max": 5.0, "n": 26},
    },
    "sharpness_p1_nu025": {
        "name": "sharpness_p1_nu025",
        "regime": "diffusive_shear",
        "lattice": {"kmax": 1, "lmax": 6},
        "initial_data": {"terms": [{"ampl": 1.0, "kx": 0, "ky": 4, "kind": "cos"}]},
        "shear": "zero",
        "nu": 0.25,
        "times": {"t_max": 2.0, "n": 21},
    },
    "sinshear_cosx": {
        "name": "sinshear_cosx",
        "regime": "diffusive_shear",
        "lattice": {"kmax": 3, "lmax": 16},
        "initial_data": {"terms": [{"ampl": 1.0, "kx": 1, "ky": 0, "kind": "cos"}]},
        "shear": {
            "kind": "shear",
            "terms": [{"ampl": 1.0, "kx": 0, "ky": 1, "phase_mode": "sin", "time_mode": "const"}],
            "bounds": {"M": 1.0, "w11": 0.6366197723675814},
            "period": 6.283185307179586,
        },
        "nu": 0.1,
        "times": {"t_max": 5.0, "n": 26},
        "dt": 0.005,
    },
    "inviscid_cosx_siny": {
        "name": "inviscid_cosx_siny",
        "regime": "inviscid",
        "lattice": {"kmax": 2, "lmax": 2},
        "initial_data": {"terms": [{"ampl": 1.0, "kx": 1, "ky": 0, "kind": "cos"}]},
        "shear": {
            "kind": "shear",
            "terms": [{"ampl": 1.0, "kx": 0, "ky": 1, "phase_mode": "sin", "time_mode": "const"}],
            "bounds": {"M": 1.0, "w11": 0.6366197723675814},
            "period": 6.283185307179586,
        },
        "times": {"t_max": 50.0, "n": 51},
    },
    "fast_shear_mean": {
        "name": "fast_shear_mean",
        "regime": "fast_oscillation",
        "lattice": {"kmax": 8, "lmax": 8},
        "initial_data": {"terms": [{"ampl": 1.0, "kx": 0, "ky": 1, "kind": "cos"}]},
        "flow": {
            "kind": "flow2d",
            "terms": [
                {"ampl": 1.0, "kx": 0, "ky": 1, "phase_mode": "cos", "time_mode": "const"},
                {"ampl": 1.0, "kx": 1, "ky": 0, "phase_mode": "cos", "time_mode": "cos"},
            ],
            "bounds": {"lip": 1.0},
            "period": 1.0,
        },
        "nu": 0.1,
        "A": 100.0,
        "cutoff": 12,
        "times": {"t_max": 2.0, "n": 21},
    },
}


def builtin_scenario(name: str) -> Scenario:
    """Named scenarios shipped with the package (see BUILTIN_SCENARIOS)."""
    if name not in BUILTIN_SCENARIOS:
        raise SchemaError(f"unknown builtin scenario {name!r}; have {sorted(BUILTIN_SCENARIOS)}")
    return Scenario.from_json(json.loads(json.dumps(BUILTIN_SCENARIOS[name])))


@dataclass
class CorpusSummary:
    rows: list[dict]
    n_pass: int
    n_fail: int
    n_error: int

    @property
    def exit_code(self) -> int:
        return 0 if (self.n_fail == 0 and self.n_error == 0) else 1


def _thread_count() -> int:
    env = os.environ.get("MIXLAB_THREADS")
    if env is None:
        return 1
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def corpus_run(directory: str | Path, out_dir: str | Path | None = None) -> CorpusSummary:
    """Run every scenario JSON in a directory; write summary CSV + per-scenario reports.

    I/O or schema failures become error rows and the run continues.
    MIXLAB_THREADS caps parallel scenario execution (default serial).
    """
    directory = Path(directory)
    out_dir = directory / "reports" if out_dir is None else Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in directory.glob("*.json"))

    def one(path: Path) -> dict:
        try:
            scenario = Scenario.from_file(path)
            report = run(scenario)
            out_path = out_dir / f"{scenario.name}.json"
            with open(out_path, "w") as fh:
                json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            return {
                "file": path.name,
                "name": scenario.name,
                "verdict": report.verdict,
                "min_margin": report.min_margin,
                "runtime": report.runtime,
                "error": "",
            }
        except Exception as exc:  # defective file: report and continue
            return {
                "file": path.name,
                "name": "",
                "verdict": "ERROR",
                "min_margin": float("nan"),
                "runtime": 0.0,
                "error": f"{type(exc).__name__}: {exc}",
            }

    workers = _thread_count()
    if workers > 1 and len(files) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, files))
    else:
        rows = [one(p) for p in files]

    rows.sort(key=lambda r: r["file"])
    summary_path = out_dir / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["file", "name", "verdict", "min_margin", "runtime", "error"])
        writer.writeheader()
        writer.writerows(rows)
    n_pass = sum(1 for r in rows if r["verdict"] == "PASS")
    n_fail = sum(1 for r in rows if r["verdict"] == "FAIL")
    n_error = sum(1 for r in rows if r["verdict"] == "ERROR")
    return CorpusSummary(rows, n_pass, n_fail, n_error)
