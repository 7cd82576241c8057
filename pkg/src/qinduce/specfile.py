"""Spec-file ingestion, normalization, the induction pipeline driver and
report emission.

File format: UTF-8 JSON; complex numbers as [re, im] pairs; element
coefficients and dense matrices row-major over the canonical (block, row,
column) bases.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algebra import (
    AlgebraElement,
    AlgebraError,
    Array,
    LegLayout,
    MultiMatrixAlgebra,
    default_tol,
)
from .action import ActionBundle, build_action_bundle
from .catalog import (
    classical_corep,
    cocommutative_corep,
    corep_character,
    group_preset,
    make_function_algebra,
    make_group_algebra,
    make_kac_paljutkin,
    make_full_action,
    make_quotient_action,
    make_subgroup_action,
    make_trivial_action,
    rep_preset,
    subgroup_preset,
    trivial_corep,
)
from .induction import (
    InducedCorep,
    build_lambda_rho,
    carrier_space,
    dense_family,
    solve_P,
    unitarity_certificate,
    weight_change_equivalence,
)
from .quantum_group import QuantumGroup, build_quantum_group


class SpecError(ValueError):
    """Malformed spec file; the message carries the offending field path."""


# ---------------------------------------------------------------------------
# JSON (de)serialization of numbers, vectors and matrices
# ---------------------------------------------------------------------------

def complex_to_json(z: complex):
    return [float(np.real(z)), float(np.imag(z))]

def json_to_complex(v, path: str = "") -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise SpecError(f"{path}: expected a number or [re, im] pair, got {v!r}")

def vector_to_json(v: Array):
    return [complex_to_json(z) for z in np.asarray(v, dtype=complex).ravel()]

def json_to_vector(v, path: str = "") -> Array:
    if not isinstance(v, list):
        raise SpecError(f"{path}: expected a list")
    return np.array([json_to_complex(x, f"{path}[{i}]") for i, x in enumerate(v)])

def matrix_to_json(m: Array):
    return [vector_to_json(row) for row in np.asarray(m, dtype=complex)]

def json_to_matrix(m, path: str = "") -> Array:
    if not isinstance(m, list) or not m:
        raise SpecError(f"{path}: expected a non-empty list of rows")
    return np.stack([json_to_vector(row, f"{path}[{i}]") for i, row in enumerate(m)])


# ---------------------------------------------------------------------------
# Spec files
# ---------------------------------------------------------------------------

@dataclass
class SpecFile:
    """Parsed and validated spec; `build()` produces the runnable objects."""

    raw: dict
    tol: float
    seed: int

    def normalized(self) -> dict:
        out = dict(self.raw)
        out["tol"] = self.tol
        out["seed"] = self.seed
        return _sort_nested(out)

    def spec_hash(self) -> str:
        blob = json.dumps(self.normalized(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _sort_nested(x):
    if isinstance(x, dict):
        return {k: _sort_nested(x[k]) for k in sorted(x)}
    if isinstance(x, list):
        return [_sort_nested(v) for v in x]
    return x


def parse_spec(data: dict | str) -> SpecFile:
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise SpecError(f"not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SpecError("top level: expected a JSON object")
    if "alpha" not in data:
        raise SpecError("alpha: required field is missing")
    tol = float(data.get("tol", default_tol()))
    seed = int(data.get("seed", 1234))
    return SpecFile(raw=data, tol=tol, seed=seed)


def serialize_spec(spec: SpecFile) -> str:
    return json.dumps(spec.normalized(), sort_keys=True, indent=2)


def _build_qg(entry, path: str) -> QuantumGroup:
    if not isinstance(entry, dict):
        raise SpecError(f"{path}: expected an object")
    if "preset" in entry:
        name = entry["preset"]
        if name.startswith("function:"):
            return make_function_algebra(name.split(":", 1)[1])
        if name.startswith("group_algebra:"):
            return make_group_algebra(name.split(":", 1)[1])
        if name == "kac_paljutkin":
            return make_kac_paljutkin()
        raise SpecError(f"{path}.preset: unknown preset {name!r}")
    if "blocks" in entry and "comult" in entry:
        A = MultiMatrixAlgebra([int(b) for b in entry["blocks"]])
        delta = json_to_matrix(entry["comult"], f"{path}.comult")
        lay2 = LegLayout.of(A, A)
        if delta.shape != (lay2.algebra.lin_dim, A.lin_dim):
            raise SpecError(
                f"{path}.comult: shape {delta.shape} does not match "
                f"({lay2.algebra.lin_dim}, {A.lin_dim})")
        return build_quantum_group(A, delta)
    raise SpecError(f"{path}: need either 'preset' or 'blocks'+'comult'")


@dataclass
class BuiltSpec:
    spec: SpecFile
    bundle: ActionBundle
    U: AlgebraElement
    lay_NK: LegLayout
    K_dim: int
    kind: str
    info: dict = field(default_factory=dict)


def build_from_spec(spec: SpecFile) -> BuiltSpec:
    """Construct the action bundle and corepresentation named by the spec."""
    data = spec.raw
    al = data["alpha"]
    if not isinstance(al, dict):
        raise SpecError("alpha: expected an object")
    theta_density = None
    if data.get("theta") is not None:
        th = data["theta"]
        if not isinstance(th, dict) or "density" not in th:
            raise SpecError("theta: expected {\"density\": [...]} or null")
        theta_density = json_to_vector(th["density"], "theta.density")

    if "preset_action" in al:
        kind = al["preset_action"]
        group = al.get("group")
        if group is None:
            raise SpecError("alpha.group: required for preset actions")
        if kind == "subgroup":
            sub = al.get("subgroup")
            if sub is None:
                raise SpecError("alpha.subgroup: required for the subgroup preset")
            M_qg, N_qg, alpha, info = make_subgroup_action(group, sub)
            classical = {"group": info["group"], "subgroup": info["subgroup"]}
        elif kind == "quotient":
            quot = al.get("quotient")
            if quot is None:
                raise SpecError("alpha.quotient: required for the quotient preset")
            M_qg, N_qg, alpha, info = make_quotient_action(group, quot,
                                                           al.get("hom", "auto"))
            classical = None
        elif kind == "trivial":
            M_qg, N_qg, alpha, info = make_trivial_action(
                group, al.get("algebra", "function"))
            classical = None
        elif kind == "full":
            M_qg, N_qg, alpha, info = make_full_action(
                group, al.get("algebra", "function"))
            classical = None
            if al.get("algebra", "function") == "function":
                classical = {"group": info["group"],
                             "subgroup": list(range(info["group"].order))}
        else:
            raise SpecError(f"alpha.preset_action: unknown kind {kind!r}")
    elif "matrix" in al:
        M_qg = _build_qg(data.get("M"), "M")
        N_qg = _build_qg(data.get("N"), "N")
        alpha = json_to_matrix(al["matrix"], "alpha.matrix")
        lay = LegLayout.of(M_qg.algebra, N_qg.algebra)
        if alpha.shape != (lay.algebra.lin_dim, M_qg.algebra.lin_dim):
            raise SpecError(
                f"alpha.matrix: shape {alpha.shape} does not match "
                f"({lay.algebra.lin_dim}, {M_qg.algebra.lin_dim})")
        classical = None
        info = {}
        kind = "explicit"
    else:
        raise SpecError("alpha: need 'preset_action' or 'matrix'")

    bundle = build_action_bundle(M_qg, N_qg, alpha, theta_density=theta_density,
                                 classical=classical)
    U, lay_NK, K_dim = _build_corep(data.get("U"), bundle, info,
                                    al.get("preset_action", "explicit"))
    return BuiltSpec(spec, bundle, U, lay_NK, K_dim,
                     al.get("preset_action", "explicit"), info)


def _build_corep(entry, bundle: ActionBundle, info: dict, kind: str):
    N_qg = bundle.N_qg
    if entry is None:
        entry = {"preset_rep": "trivial", "K_dim": 1}
    if not isinstance(entry, dict):
        raise SpecError("U: expected an object")
    if "preset_rep" in entry:
        label = entry["preset_rep"]
        if label == "trivial":
            d = int(entry.get("K_dim", 1))
            U, d = trivial_corep(N_qg, d)
        elif label == "grading":
            grading = entry.get("grading")
            if grading is None:
                raise SpecError("U.grading: required for the grading preset")
            U, d = cocommutative_corep(N_qg, [int(g) for g in grading])
        else:
            G = getattr(N_qg, "group", None)
            if G is None:
                raise SpecError(f"U.preset_rep: {label!r} needs a classical N")
            mats = rep_preset(G, label, list(range(G.order)))
            U, d = classical_corep(N_qg, mats)
    elif "matrix" in entry:
        d = int(entry.get("K_dim", 0))
        if d <= 0:
            raise SpecError("U.K_dim: required with an explicit matrix")
        BK = MultiMatrixAlgebra([d])
        lay_NK = LegLayout.of(N_qg.algebra, BK)
        coeffs = json_to_vector(entry["matrix"], "U.matrix")
        if coeffs.size != lay_NK.algebra.lin_dim:
            raise SpecError(
                f"U.matrix: length {coeffs.size} does not match "
                f"{lay_NK.algebra.lin_dim}")
        U = lay_NK.algebra.from_coeffs(coeffs)
        return U, lay_NK, d
    else:
        raise SpecError("U: need 'preset_rep' or 'matrix'+'K_dim'")
    lay_NK = LegLayout.of(N_qg.algebra, MultiMatrixAlgebra([d]))
    return U, lay_NK, d


# ---------------------------------------------------------------------------
# The induce pipeline and its report
# ---------------------------------------------------------------------------

REPORT_THRESHOLDS = {
    "isometry": 1e-8,
    "corep": 1e-8,
    "unitarity": 1e-8,
    "impl1": 1e-9,
    "impl2": 1e-9,
    "dense_span_deficit": 0,
    "K0_deficit": 0,
    "weight_change": 1e-8,
}


def _alternative_density(bundle: ActionBundle, seed: int) -> Array:
    """A deterministic faithful density on Q distinct from theta."""
    rng = np.random.default_rng(seed)
    h = bundle.theta.density
    s = bundle.Q.sub.random_element(rng, hermitian=True)
    s = (0.3 / max(1.0, s.norm())) * s
    from .algebra import matrix_function
    half = matrix_function(h, "sqrt")
    cand = half * (bundle.Q.sub.unit() + s) * half
    return cand.coeffs


def run_induce(spec: SpecFile) -> dict:
    """The full pipeline with certificates; returns the report object."""
    t0 = time.monotonic()
    built = build_from_spec(spec)
    bundle = built.bundle
    ps = solve_P(bundle, built.U, built.lay_NK, built.K_dim, tol=spec.tol)
    carrier = carrier_space(bundle, ps, tol=spec.tol)
    corep = build_lambda_rho(bundle, built.U, built.lay_NK, built.K_dim,
                             carrier=carrier, tol=spec.tol)
    unit = unitarity_certificate(corep, tol=spec.tol)
    dens = dense_family(bundle, built.U, built.lay_NK, carrier, tol=spec.tol)
    wc = weight_change_equivalence(corep, _alternative_density(bundle, spec.seed),
                                   tol=spec.tol)
    chi = corep_character(corep.rho_abstract, corep.lay_MK)

    residuals = {
        "isometry": corep.residuals["isometry"],
        "corep": corep.residuals["corep_identity"],
        "unitarity": max(unit["rho_coisometry"], unit["rho_isometry"]),
        "impl1": bundle.certificates["upsilon_impl1"],
        "impl2": bundle.certificates["upsilon_impl2"],
        "dense_span_deficit": dens["dense_span_deficit"],
        "K0_deficit": unit["K0_deficit"],
        "weight_change": wc["equivalence"],
    }
    passed = all(residuals[k] <= REPORT_THRESHOLDS[k] for k in REPORT_THRESHOLDS)
    report = {
        "dim_P": ps.dim,
        "dim_carrier": carrier.rank,
        "gram_rank": carrier.rank,
        "residuals": {k: (v if isinstance(v, int) else float(v))
                      for k, v in residuals.items()},
        "character": vector_to_json(chi.coeffs),
        "spec_hash": spec.spec_hash(),
        "versions": {"qinduce": __version__, "numpy": np.__version__},
        "wall_time_ms": (time.monotonic() - t0) * 1e3,
        "passed": bool(passed),
    }
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(_sort_nested(report), sort_keys=True, indent=2,
                      default=_json_default)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return float(x)
    raise TypeError(f"not JSON serializable: {type(x)}")
