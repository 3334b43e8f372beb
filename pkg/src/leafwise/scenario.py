"""Scenario files and the solve pipeline.

A scenario is one JSON document:

    {
      "name": "regimeA_constant",
      "grid": {"points": [64], "periods": [6.283185307179586]},
      "coefficients": {"constants": {"beta_top": -3.5, "psi1": 3.5, "psi2": 1, "psi3": 1}},
      "phi": 0.0,
      "expect_regime": "A",
      "theorem": {"id": "attractor"},
      "evolution": {"dt": 0.01, "t_end": 60, "snapshot_stride": 5},
      "probe": {"n_seeds": 10},
      "seed": 1,
      "output": "out/regimeA_constant"
    }

Coefficient sources are exactly one of ``constants``, ``fields`` or
``geometry``.  A field value is a number, an inline array, a CSV path
(relative to the scenario file) or {"expr": "..."} in the grid coordinates
x (and y).  Ψ expressions may also use e0, the ground state of β⊤ + Φ.
"""

from __future__ import annotations

import ast
import copy
import json
import math
import operator
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conditions import THEOREMS, check_conditions
from .cubic import RegimeTag, envelope_coefficients, root_ladder
from .errors import ConfigError, HypothesisError, LeafwiseError, NonPositiveError
from .flow import EvolutionConfig, evolve, fit_decay_rate, sandwich_check
from .geometry import GeometryInput, coefficients_from_geometry
from .grid import ScalarField, TorusGrid, read_field_csv, write_field_csv
from .model import SPECTRAL_CONVENTIONS, Coefficients
from .ode import OdeParams, stationary_points
from .spectral import ground_state
from .stationary import solve_stationary, uniqueness_probe

COEFF_NAMES = ("beta_top", "psi1", "psi2", "psi3")
GEOMETRY_NAMES = ("h_top_sq", "t_bot_sq", "a_T", "b_T", "s_mix_bar")
SWEEP_PARAMS = ("Phi", "psi1_scale", "psi2_scale", "psi3_scale", "beta_shift")
RATIO_TOL = 1e-9

# ---------------------------------------------------------------------------
# field expressions

_FUNCS = {"sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
          "sqrt": np.sqrt, "abs": np.abs, "tanh": np.tanh, "cosh": np.cosh, "sinh": np.sinh}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def eval_expr(expr: str, names: dict):
    """Evaluate an arithmetic expression over whitelisted names and functions."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"bad expression {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                return names[node.id]
            if node.id in _CONSTS:
                return _CONSTS[node.id]
            raise ConfigError(f"unknown name {node.id!r} in {expr!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported syntax in {expr!r}")

    return ev(tree)


def field_from_spec(spec, grid: TorusGrid, base_dir: Path, what: str,
                    extra: dict | None = None) -> ScalarField:
    if isinstance(spec, bool):
        raise ConfigError(f"{what}: booleans are not fields")
    if isinstance(spec, (int, float)):
        return ScalarField.constant(grid, float(spec))
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float).reshape(-1)
        if arr.size != grid.size:
            raise ConfigError(f"{what}: {arr.size} values for a grid of {grid.size} points")
        return ScalarField(grid, arr)
    if isinstance(spec, str):
        path = (base_dir / spec)
        if not path.exists():
            raise ConfigError(f"{what}: file {spec} does not exist")
        try:
            return read_field_csv(path, grid)
        except ValueError as exc:
            raise ConfigError(f"{what}: {exc}") from None
    if isinstance(spec, dict) and set(spec) == {"expr"}:
        coords = grid.coords()
        names = dict(zip(("x", "y"), coords))
        if extra:
            names.update({k: v.reshape(grid.shape) for k, v in extra.items()})
        val = eval_expr(str(spec["expr"]), names)
        arr = np.broadcast_to(np.asarray(val, dtype=float), grid.shape).reshape(-1)
        return ScalarField(grid, np.array(arr))
    raise ConfigError(f"{what}: expected a number, array, CSV path or {{'expr': ...}}")


# ---------------------------------------------------------------------------
# scenario


@dataclass
class Scenario:
    name: str
    grid: TorusGrid
    coefficients: Coefficients
    source: str
    expect_regime: RegimeTag | None = None
    theorem: str = "attractor"
    case: str | None = None
    k2_grouping: str = "as_printed"
    spectral_beta: str = "beta_top_plus_phi"
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    n_seeds: int = 0
    seed: int | None = None
    output: str = "out"
    initial: float | None = None
    geometry: GeometryInput | None = None
    raw: dict = field(default_factory=dict, repr=False)
    base_dir: Path = Path(".")

    def with_overrides(self, seed=None, output=None) -> "Scenario":
        s = copy.copy(self)
        if seed is not None:
            s.seed = int(seed)
        if output is not None:
            s.output = str(output)
        return s


def _num(d, key, default, kind=float):
    v = d.get(key, default)
    try:
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a {kind.__name__}") from None


def parse_scenario(doc: dict, base_dir: Path = Path(".")) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    name = str(doc.get("name", "scenario"))
    g = doc.get("grid", {})
    try:
        points = g.get("points", [64])
        points = [int(points)] if isinstance(points, (int, float)) else [int(p) for p in points]
        periods = g.get("periods", [2 * math.pi] * len(points))
        periods = [float(periods)] * len(points) if isinstance(periods, (int, float)) \
            else [float(p) for p in periods]
        grid = TorusGrid(tuple(points), tuple(periods))
    except (ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(f"grid: {exc}") from None

    src = doc.get("coefficients")
    if not isinstance(src, dict):
        raise ConfigError("coefficients block is required")
    keys = [k for k in ("constants", "fields", "geometry") if k in src]
    if len(keys) != 1:
        raise ConfigError("coefficients must have exactly one of constants, fields, geometry")
    source = keys[0]
    block = src[source]
    phi_spec = doc.get("phi", 0.0)
    if isinstance(phi_spec, (int, float)) and not isinstance(phi_spec, bool):
        phi = float(phi_spec)
    else:
        phi = field_from_spec(phi_spec, grid, base_dir, "phi")
    geom = None
    if source in ("constants", "fields"):
        missing = [k for k in COEFF_NAMES if k not in block]
        if missing:
            raise ConfigError(f"coefficients.{source} is missing {missing}")
        if source == "constants":
            bad = [k for k in COEFF_NAMES if not isinstance(block[k], (int, float))]
            if bad:
                raise ConfigError(f"constants must be numbers: {bad}")
        f = {"beta_top": field_from_spec(block["beta_top"], grid, base_dir, "beta_top")}
        extra = None
        if any(isinstance(block[k], dict) and "e0" in str(block[k].get("expr", ""))
               for k in COEFF_NAMES[1:]):
            # Ψ expressions may use the ground state e0 of β⊤ + Φ
            try:
                extra = {"e0": ground_state(f["beta_top"] + phi).ground_state.values}
            except (ValueError, LeafwiseError) as exc:
                raise ConfigError(f"cannot evaluate e0 for the field expressions: {exc}") from None
        f.update({k: field_from_spec(block[k], grid, base_dir, k, extra) for k in COEFF_NAMES[1:]})
        co = Coefficients(f["beta_top"], f["psi1"], f["psi2"], f["psi3"], phi)
    else:
        try:
            n = int(block["n"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("geometry.n must be a positive integer") from None
        gf = {k: field_from_spec(block.get(k, 0.0), grid, base_dir, k) for k in GEOMETRY_NAMES}
        try:
            geom = GeometryInput(n, gf["h_top_sq"], gf["t_bot_sq"], gf["a_T"], gf["b_T"],
                                 gf["s_mix_bar"], phi)
        except ValueError as exc:
            raise ConfigError(f"geometry: {exc}") from None
        co = coefficients_from_geometry(geom)
    if np.min(co.psi2.values) < 0:
        raise ConfigError("Psi2 must be nonnegative everywhere (the equation assumes Psi2 >= 0)")

    exp = doc.get("expect_regime")
    if exp is not None:
        try:
            exp = RegimeTag(exp)
        except ValueError:
            raise ConfigError(f"unknown regime {exp!r}") from None
    th = doc.get("theorem", {"id": "attractor"})
    if isinstance(th, str):
        th = {"id": th}
    tid = th.get("id", "attractor")
    if tid not in THEOREMS:
        raise ConfigError(f"unknown theorem id {tid!r}; expected one of {THEOREMS}")
    case = th.get("case")
    k2 = th.get("k2_grouping", "as_printed")
    if k2 not in ("as_printed", "grouped"):
        raise ConfigError("k2_grouping must be 'as_printed' or 'grouped'")
    sb = doc.get("spectral_beta", "beta_top_plus_phi")
    if sb not in SPECTRAL_CONVENTIONS:
        raise ConfigError(f"spectral_beta must be one of {SPECTRAL_CONVENTIONS}")
    if sb == "beta_top" and not co.phi_is_constant:
        raise ConfigError("spectral_beta 'beta_top' needs a constant phi")

    ev = doc.get("evolution", {})
    try:
        cfg = EvolutionConfig(dt_initial=_num(ev, "dt", 1e-2), t_end=_num(ev, "t_end", 60.0),
                              scheme=str(ev.get("scheme", "imex")),
                              snapshot_stride=_num(ev, "snapshot_stride", 5, int),
                              positivity_floor=_num(ev, "positivity_floor", 1e-10))
    except ValueError as exc:
        raise ConfigError(f"evolution: {exc}") from None
    probe = doc.get("probe", {})
    n_seeds = _num(probe, "n_seeds", 0, int)
    seed = doc.get("seed")
    if n_seeds > 0 and seed is None:
        raise ConfigError("a seed is required when the uniqueness probe is enabled")
    init = doc.get("initial")
    return Scenario(name, grid, co, source, exp, tid, None if case is None else str(case), k2,
                    sb, cfg, n_seeds, None if seed is None else int(seed),
                    str(doc.get("output", f"out/{name}")),
                    None if init is None else float(init), geom, doc, base_dir)


BUNDLED_DIR = Path(__file__).parent / "scenarios"


def bundled_scenarios() -> list[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.json"))


def bundled_scenario(name: str) -> Path:
    path = BUNDLED_DIR / f"{name}.json"
    if not path.exists():
        raise ConfigError(f"no bundled scenario {name!r}; available: {bundled_scenarios()}")
    return path


def load_scenario(path) -> Scenario:
    """Load a scenario file; a bare name selects one of the bundled scenarios."""
    path = Path(path)
    if not path.exists() and path.suffix == "" and len(path.parts) == 1:
        path = bundled_scenario(path.name)
    if not path.exists():
        raise ConfigError(f"scenario file {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_scenario(doc, path.parent)


# ---------------------------------------------------------------------------
# pipeline


def clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, RegimeTag):
        return obj.value
    return obj


@dataclass
class Certificate:
    name: str
    passed: bool
    value: float | None = None
    bound: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "value": self.value,
                "bound": self.bound, "detail": self.detail}


@dataclass
class PipelineResult:
    report: dict
    certificates: list
    trace: object = None
    solution: object = None
    spectral: object = None
    ladder: object = None

    @property
    def failing(self) -> list[str]:
        return [c.name for c in self.certificates if not c.passed]

    @property
    def exit_code(self) -> int:
        return 0 if not self.failing else 1


def run_pipeline(sc: Scenario, *, probe: bool = True, sandwich: bool = True) -> PipelineResult:
    co = sc.coefficients
    certs: list[Certificate] = []
    rep: dict = {"name": sc.name, "grid": sc.grid.to_dict(), "source": sc.source,
                 "phi": co.phi_value if co.phi_is_constant else "field",
                 "spectral_beta": sc.spectral_beta, "seed": sc.seed}

    # spectral data of the evolution operator -Δ - (β⊤ + Φ)
    sp = ground_state(co.beta)
    rep["spectral"] = sp.to_dict(include_field=False)
    lam = sp.lambda0
    e0 = sp.ground_state
    if sc.spectral_beta == "beta_top" and sc.theorem != "attractor":
        sp_th = ground_state(co.spectral_beta("beta_top"))
        rep["spectral_theorem"] = sp_th.to_dict(include_field=False)
    else:
        sp_th = sp

    env = envelope_coefficients(co.psi1, co.psi2, co.psi3, e0)
    rep["envelopes"] = env.to_dict()
    regime = co.regime(lam)
    rep["regime"] = regime.value
    if sc.expect_regime is not None:
        certs.append(Certificate("regime_expectation", regime == sc.expect_regime,
                                 detail=f"expected {sc.expect_regime.value}, got {regime.value}"))
    if all(f.is_constant() for f in (co.beta, co.psi1, co.psi2, co.psi3)):
        par = OdeParams(float(co.beta.values[0]), float(co.psi1.values[0]),
                        float(co.psi2.values[0]), float(co.psi3.values[0]))
        rep["comparison_ode"] = [{"y": p.y, "slope": p.slope, "stability": p.stability}
                                 for p in stationary_points(par)]

    # hypotheses
    try:
        cond = check_conditions(sc.theorem, sp_th, None if sc.theorem != "attractor" else env,
                                sc.geometry, coefficients=co, case=sc.case,
                                k2_grouping=sc.k2_grouping)
        rep["conditions"] = cond.to_dict()
        failing = cond.failing()
        certs.append(Certificate("conditions", not failing,
                                 detail="failing: " + ", ".join(failing) if failing else ""))
    except (ValueError, LeafwiseError) as exc:
        rep["conditions"] = {"error": str(exc)}
        certs.append(Certificate("conditions", False, detail=str(exc)))
    if sc.theorem != "attractor":
        # the attractor certificate needs its own report when another theorem is requested
        try:
            att = check_conditions("attractor", sp, env, coefficients=co)
            rep["attractor_conditions"] = att.to_dict()
        except (ValueError, LeafwiseError) as exc:
            rep["attractor_conditions"] = {"error": str(exc)}

    ladder = None
    try:
        ladder = root_ladder(regime, lam, env)
        rep["ladder"] = ladder.to_dict()
        certs.append(Certificate("ladder_ordering", ladder.ordering_verified or ladder.degenerate,
                                 detail="chain " + " < ".join(ladder.chain)))
    except HypothesisError as exc:
        rep["ladder"] = {"error": str(exc), "check": exc.check}
        certs.append(Certificate("ladder", False, detail=f"{exc.check}: {exc}"))

    # evolution: the default seed sits inside the invariant band, half way below y2-
    band = None
    if ladder is not None:
        eps = ladder.sigma if ladder.sigma else 0.1 * ladder.y2_minus
        eta = ladder.tau if ladder.tau else ladder.y2_plus
        band = (ladder.y2_minus - eps, ladder.y2_plus + eta)
        rep["band"] = list(band)
    if sc.initial is not None:
        u0 = ScalarField.constant(sc.grid, sc.initial)
    elif ladder is not None:
        u0 = ScalarField(sc.grid, (ladder.y2_minus - 0.5 * eps) * e0.values)
    else:
        u0 = ScalarField.constant(sc.grid, 1.0)
    try:
        u_fin, trace = evolve(co.beta, co.psi1, co.psi2, co.psi3, u0, sc.evolution, e0=e0,
                              band=band)
    except (FloatingPointError, ValueError) as exc:
        rep["evolution"] = {"error": str(exc)}
        certs.append(Certificate("evolution", False, detail=str(exc)))
        return PipelineResult(rep, certs, None, None, sp, ladder)
    rep["evolution"] = trace.summary()
    rep["evolution"]["config"] = sc.evolution.to_dict()
    certs.append(Certificate("evolution_converged", trace.terminal == "converged",
                             detail=trace.terminal))
    if band is not None:
        certs.append(Certificate("invariant_set", all(trace.invariant_set_flags)))

    sol = None
    if u_fin is not None and trace.terminal in ("converged", "max_time"):
        try:
            sol = solve_stationary(co.beta, co.psi1, co.psi2, co.psi3, u_fin, e0=e0)
        except (LeafwiseError, ValueError, NonPositiveError) as exc:
            rep["stationary"] = {"error": str(exc)}
            certs.append(Certificate("stationary", False, detail=str(exc)))
    if sol is not None:
        rep["stationary"] = sol.to_dict(include_field=False)
        flow_gap = float(np.max(np.abs(sol.u_star.values - u_fin.values)))
        rep["stationary"]["flow_newton_distance"] = flow_gap
        certs.append(Certificate("elliptic_residual", sol.elliptic_residual < 1e-9,
                                 sol.elliptic_residual, 1e-9))
        certs.append(Certificate("linearization_gap", sol.linearization_gap > 0,
                                 sol.linearization_gap, 0.0))
        if ladder is not None:
            lo, hi = sol.ratio_bounds
            ok = (ladder.y2_minus - RATIO_TOL <= lo) and (hi <= ladder.y2_plus + RATIO_TOL)
            certs.append(Certificate("ratio_bounds", ok, detail=f"[{lo:.12g}, {hi:.12g}] in "
                                     f"[{ladder.y2_minus:.12g}, {ladder.y2_plus:.12g}]"))

    if trace.terminal == "converged":
        try:
            rate, r2 = fit_decay_rate(trace)
            rep["decay"] = {"rate": rate, "r_squared": r2,
                            "mu_plus": None if ladder is None else ladder.mu_plus}
            if ladder is not None and ladder.mu_plus is not None:
                certs.append(Certificate("decay_rate", rate >= 0.9 * ladder.mu_plus, rate,
                                         0.9 * ladder.mu_plus))
        except ValueError as exc:
            rep["decay"] = {"error": str(exc)}
            certs.append(Certificate("decay_rate", False, detail=str(exc)))

    if sandwich and ladder is not None and band is not None:
        try:
            sw = sandwich_check(trace, ladder, e0, ladder.y2_minus - band[0],
                                band[1] - ladder.y2_plus)
            rep["sandwich"] = sw.to_dict()
            certs.append(Certificate("sandwich", sw.holds, float(sw.violations), 0.0))
        except ValueError as exc:
            rep["sandwich"] = {"error": str(exc)}

    if probe and sc.n_seeds > 0 and ladder is not None and sol is not None:
        pr = uniqueness_probe(co.beta, co.psi1, co.psi2, co.psi3, ladder, e0,
                              n_seeds=sc.n_seeds, seed=sc.seed)
        rep["probe"] = pr.to_dict()
        certs.append(Certificate("uniqueness_probe", pr.agree, pr.max_pairwise, pr.tol))

    rep["certificates"] = [c.to_dict() for c in certs]
    rep["failing"] = [c.name for c in certs if not c.passed]
    return PipelineResult(rep, certs, trace, sol, sp, ladder)


# ---------------------------------------------------------------------------
# outputs


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def report_json(report: dict) -> str:
    return json.dumps(clean(report), indent=2, sort_keys=True)


def write_outputs(sc: Scenario, res: PipelineResult, out: Path, timestamp: str | None = None):
    out.mkdir(parents=True, exist_ok=True)
    (out / "fields").mkdir(exist_ok=True)
    (out / "plotdata").mkdir(exist_ok=True)
    rep = dict(res.report)
    rep["exit_code"] = res.exit_code
    if timestamp is not None:
        rep["timestamp"] = timestamp
    _atomic_write(out / "report.json", report_json(rep))
    co = sc.coefficients
    for name, f in (("beta", co.beta), ("psi1", co.psi1), ("psi2", co.psi2), ("psi3", co.psi3)):
        write_field_csv(f, out / "fields" / f"{name}.csv")
    if res.spectral is not None:
        write_field_csv(res.spectral.ground_state, out / "fields" / "e0.csv")
    if res.trace is not None:
        res.trace.write_csv(out / "trace.csv")
        with open(out / "plotdata" / "sup_distance.csv", "w") as fh:
            fh.write("t,sup_dist\n")
            for t, d in zip(res.trace.times, res.trace.sup_distances_to_limit):
                fh.write(f"{t!r},{d!r}\n")
    if res.solution is not None:
        write_field_csv(res.solution.u_star, out / "fields" / "u_star.csv")
        w = res.solution.u_star.values / res.spectral.ground_state.values
        y2m = res.ladder.y2_minus if res.ladder is not None else float("nan")
        y2p = res.ladder.y2_plus if res.ladder is not None else float("nan")
        x = sc.grid.coords()[0].reshape(-1)
        with open(out / "plotdata" / "ratio_profile.csv", "w") as fh:
            fh.write("index,x,ratio,y2_minus,y2_plus\n")
            for i, (xi, wi) in enumerate(zip(x, w)):
                fh.write(f"{i},{float(xi)!r},{float(wi)!r},{y2m!r},{y2p!r}\n")


# ---------------------------------------------------------------------------
# sweeps


def apply_param(sc: Scenario, param: str, value: float) -> Scenario:
    co = sc.coefficients
    if param == "Phi":
        co = co.with_phi(float(value))
    elif param == "beta_shift":
        co = co.scaled(beta_shift=value)
    else:
        k = {"psi1_scale": "psi1", "psi2_scale": "psi2", "psi3_scale": "psi3"}[param]
        co = co.scaled(**{k: value})
    s = copy.copy(sc)
    s.coefficients = co
    if sc.geometry is not None and param == "Phi":
        g = sc.geometry
        s.geometry = GeometryInput(g.n, g.h_top_sq, g.t_bot_sq, g.a_T, g.b_T, g.s_mix_bar,
                                   float(value))
    elif param != "Phi":
        s.geometry = None
    s.expect_regime = None
    return s


SWEEP_COLUMNS = ["param", "value", "regime", "lambda0", "conditions_pass", "failing_checks",
                 "phi_lo", "phi_hi", "predicted", "y2_minus", "y2_plus", "mu_plus", "terminal",
                 "converged", "ratio_min", "ratio_max", "gap"]


def sweep_point(args) -> dict:
    sc, param, value, out_dir = args
    s = apply_param(sc, param, value)
    row = {"param": param, "value": float(value)}
    try:
        res = run_pipeline(s, probe=False, sandwich=False)
        rep = res.report
        cond = rep.get("conditions", {})
        checks = cond.get("checks", [])
        interval = cond.get("phi_interval")
        row.update(regime=rep.get("regime"), lambda0=rep["spectral"]["lambda0"],
                   conditions_pass=bool(checks) and all(c["pass"] for c in checks),
                   failing_checks=";".join(c["name"] for c in checks if not c["pass"]))
        if interval:
            lo, hi = (float(v) for v in interval)
            row.update(phi_lo=lo, phi_hi=hi)
        if param == "Phi":
            # prediction from the theorem interval, which does not depend on Φ itself
            base = check_conditions(s.theorem, res.spectral, None, s.geometry,
                                    coefficients=s.coefficients, case=s.case,
                                    k2_grouping=s.k2_grouping, with_phi=False)
            if base.phi_interval is not None:
                lo, hi = base.phi_interval
                row.update(phi_lo=lo, phi_hi=hi, predicted=bool(lo < value < hi))
            else:
                row.update(predicted=False)
        if res.ladder is not None:
            row.update(y2_minus=res.ladder.y2_minus, y2_plus=res.ladder.y2_plus,
                       mu_plus=res.ladder.mu_plus)
        ev = rep.get("evolution", {})
        row["terminal"] = ev.get("terminal", "error")
        row["converged"] = res.solution is not None and ev.get("terminal") == "converged"
        if res.solution is not None:
            row.update(ratio_min=res.solution.ratio_bounds[0],
                       ratio_max=res.solution.ratio_bounds[1],
                       gap=res.solution.linearization_gap)
    except (LeafwiseError, ValueError, FloatingPointError) as exc:
        row.update(terminal="error", converged=False, failing_checks=str(exc))
    if out_dir is not None:
        pdir = Path(out_dir) / "points"
        pdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(pdir / f"{param}_{float(value):+.12e}.json",
                      json.dumps(clean(row), sort_keys=True))
    return row


def sweep_values(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    if not (math.isfinite(start) and math.isfinite(stop)) or start == stop:
        raise ConfigError("empty sweep range")
    if start > stop:
        raise ConfigError("empty sweep range: start is above stop")
    return np.linspace(start, stop, steps)


def run_sweep(sc: Scenario, param: str, start: float, stop: float, steps: int,
              out: Path | None = None, threads: int = 1) -> list[dict]:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"parameter must be one of {SWEEP_PARAMS}")
    vals = sweep_values(start, stop, steps)
    jobs = [(sc, param, float(v), None if out is None else str(out)) for v in vals]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(sweep_point, jobs))
    else:
        rows = [sweep_point(j) for j in jobs]
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        lines = [",".join(SWEEP_COLUMNS)]
        for r in rows:
            cells = []
            for c in SWEEP_COLUMNS:
                v = r.get(c, "")
                cells.append(repr(float(v)) if isinstance(v, float) else str(v))
            lines.append(",".join(cells))
        _atomic_write(out / "sweep.csv", "\n".join(lines) + "\n")
    return rows
