"""JSON certificate documents and their independent re-verification."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .lhs import (
    ASSEMBLAGE_TOL,
    FEASIBILITY_TOL,
    RECONSTRUCTION_TOL,
    WITNESS_GAP_TOL,
    LhsModel,
    SteeringVerdict,
    UndecidedBounds,
    Witness,
    assemblage_from_pauli,
    verify_lhs_model,
    witness_bound,
    witness_value,
)
from .polytope import CONTAINMENT_TOL, inradius
from .projective import (
    AxialLhsModel,
    AxialWitness,
    NetCertificate,
    axial_form,
    verify_axial_model,
    verify_axial_witness,
)
from .qstate import PauliForm

TOLERANCES = {
    "feasibility": FEASIBILITY_TOL,
    "reconstruction": RECONSTRUCTION_TOL,
    "witness_gap": WITNESS_GAP_TOL,
    "assemblage": ASSEMBLAGE_TOL,
    "containment": CONTAINMENT_TOL,
}


def form_to_dict(form: PauliForm) -> dict:
    return {"a": form.a.tolist(), "b": form.b.tolist(), "T": form.T.tolist()}


def form_from_dict(d: dict) -> PauliForm:
    try:
        return PauliForm(d["a"], d["b"], d["T"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed Pauli form: {exc}") from None


def _certificate_dict(verdict: SteeringVerdict, directions) -> dict:
    c = verdict.certificate
    if isinstance(c, LhsModel):
        return c.to_dict()
    if isinstance(c, Witness):
        d = c.to_dict()
        d["directions"] = np.asarray(directions).tolist()
        d["hidden_vertices"] = np.asarray(verdict.details["polytope"]).tolist()
        return d
    if isinstance(c, (AxialWitness, AxialLhsModel, UndecidedBounds)):
        return c.to_dict()
    if isinstance(c, NetCertificate):
        inner = c.inner.to_dict()
        d = {
            "type": "net_" + c.kind,
            "directions": c.directions.tolist(),
            "eta": c.eta,
            "inner": inner,
        }
        if c.hidden_vertices is not None:
            d["hidden_vertices"] = np.asarray(c.hidden_vertices).tolist()
        return d
    raise TypeError(f"cannot serialise certificate of type {type(c).__name__}")


def build_document(input_record: dict, verdict: SteeringVerdict, directions=None) -> dict:
    return {
        "input": input_record,
        "verdict": verdict.status.value,
        "certificate": _certificate_dict(verdict, directions),
        "tolerances": dict(TOLERANCES),
        "version": __version__,
    }


def write_document(doc: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def load_document(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read certificate {path}: {exc}") from None
    missing = {"input", "verdict", "certificate", "tolerances", "version"} - set(doc)
    if missing:
        raise ValidationError(f"certificate lacks keys {sorted(missing)}")
    return doc


def _check_witness(cert: dict, form: PauliForm, directions) -> tuple[bool, str]:
    W = np.asarray(cert["coefficients"], dtype=float)
    V = np.asarray(cert["hidden_vertices"], dtype=float)
    asm = assemblage_from_pauli(form, directions)
    if W.shape != asm.coords.shape:
        return False, "witness shape does not match the assemblage"
    if inradius(V) < 1.0 - CONTAINMENT_TOL:
        return False, "hidden-state polytope does not contain the Bloch ball"
    value = witness_value(W, asm)
    bound = witness_bound(W, V)
    ok = value - bound > WITNESS_GAP_TOL
    return ok, f"witness value {value:.6e} vs LHS bound {bound:.6e}"


def _check_model(cert: dict, form: PauliForm) -> tuple[bool, str]:
    model = LhsModel.from_dict(cert)
    asm = assemblage_from_pauli(form, model.directions)
    ok = verify_lhs_model(model, asm)
    err = float(np.max(np.abs(model.reconstruct() - asm.coords)))
    return ok, f"model reconstruction error {err:.3e}"


def verify_document(doc: dict) -> tuple[bool, str]:
    """Re-check a certificate from its stored input alone."""
    cert = doc["certificate"]
    form = form_from_dict(doc["input"].get("pauli", {}))
    kind = cert.get("type")
    verdict = doc["verdict"]
    expected = {
        "witness": "steerable",
        "axial_witness": "steerable",
        "net_witness": "steerable",
        "lhs_model": "unsteerable",
        "axial_lhs_model": "unsteerable",
        "net_lhs_model": "unsteerable",
        "bounds": "undecided",
    }
    if kind not in expected:
        raise ValidationError(f"unknown certificate type {kind!r}")
    if expected[kind] != verdict:
        return False, f"certificate type {kind} does not support verdict {verdict}"
    if kind == "bounds":
        ok = all(math.isfinite(cert[k]) for k in ("outer_slack", "inner_slack"))
        return ok, "undecided: nothing to certify"
    if kind == "witness":
        return _check_witness(cert, form, np.asarray(cert["directions"], dtype=float))
    if kind == "lhs_model":
        return _check_model(cert, form)
    if kind in ("axial_witness", "axial_lhs_model"):
        st = axial_form(form)
        if st is None:
            return False, "state is not rotation-symmetric about z"
        if kind == "axial_witness":
            w = AxialWitness.from_dict(cert)
            return verify_axial_witness(w, st), f"axial witness over {len(w.thetas)} polar angles"
        m = AxialLhsModel.from_dict(cert)
        return verify_axial_model(m, st), f"axial model with {len(m.zetas)} rings, eta {m.eta:.6f}"
    directions = np.asarray(cert["directions"], dtype=float)
    if kind == "net_witness":
        inner = dict(cert["inner"], hidden_vertices=cert["hidden_vertices"])
        return _check_witness(inner, form, directions)
    eta = float(cert["eta"])
    if eta > inradius(np.vstack([directions, -directions])) + 1e-12:
        return False, "inflation factor exceeds the inradius of the direction net"
    inflated = PauliForm(form.a / eta, form.b, form.T / eta)
    return _check_model(cert["inner"], inflated)
