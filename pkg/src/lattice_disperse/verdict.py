"""Verdict records shared by every verifier in the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

SLACK = 1e-10

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"
DESCRIPTIVE = "descriptive"
STATUSES = (PASS, FAIL, SKIPPED, DESCRIPTIVE)

# Every record names the inequality or identity it probes.  Orphan checks
# (anchors outside this table) are rejected at construction time.
PROVENANCE = {
    "rho-weight": "product weight prod_j (1+|n_j|)^-1",
    "young-inequality": "discrete Young inequality for trilinear convolution sums",
    "riesz-thorin": "discrete Riesz-Thorin interpolation",
    "summation-estimate": "double lattice sum with (1+||n-m|-t|)^-beta decay",
    "bessel-accuracy": "integer-order Bessel evaluation accuracy",
    "bessel-szego": "Szego bound |J_0(t)| <= sqrt(2/(pi|t|))",
    "bessel-landau-order": "Landau bound |J_n(t)| <= b|n|^-1/3",
    "bessel-landau-argument": "Landau bound |J_n(t)| <= c|t|^-1/3",
    "bessel-krasikov": "Krasikov bound for n >= 1/2",
    "bessel-fused": "fused bound |t|^-1/4 (|n|^1/3 + ||t|-|n||)^-1/4",
    "bessel-small-t": "small-argument bound (|n|+1)^-1/2",
    "bessel-pointwise": "all pointwise Bessel bounds on their domains",
    "bessel-weighted-lp": "weighted L^p integral of |J_n| over [1, inf)",
    "propagator-unitarity": "unitarity of the free lattice propagator",
    "propagator-smoothing": "l^s -> l^r smoothing of the free propagator",
    "propagator-weighted-decay": "rho-weighted propagator decay",
    "propagator-dispersive-lq": "l^q-weighted dispersive estimate",
    "propagator-dispersive-weighted": "l^q_kappa-weighted dispersive estimate",
    "propagator-time-integral": "weighted time integral of the propagator kernel",
    "resolvent-r01-contraction": "short-time resolvent part: norm and Lipschitz bound",
    "resolvent-r02-holder": "long-time resolvent kernel Holder bound",
    "resolvent-operator-bound": "l^q-weighted resolvent operator-norm bound",
    "resolvent-operator-holder": "l^q-weighted resolvent operator-norm Holder bound",
    "resolvent-hs-bound": "l^q-weighted resolvent Hilbert-Schmidt bound",
    "resolvent-hs-holder": "l^q-weighted resolvent Hilbert-Schmidt Holder bound",
    "bs-correspondence": "eigenfunction <-> Birman-Schwinger solution correspondence",
    "bs-small-coupling": "no Birman-Schwinger spectrum below the small-coupling threshold",
    "bs-rank-one": "rank-one Birman-Schwinger root vs dense eigensolver",
    "bs-multiplicity": "eigenvalue multiplicity equals Birman-Schwinger kernel dimension",
    "limiting-absorption-identity": "Y(z)(I + Y_0(z)) = q_2 R_0(z) q_2",
    "wave-operator": "existence of wave operators (qualitative probe)",
    "finiteness": "finiteness of the Birman-Schwinger set for d >= 5",
    "embedded-scan": "embedded-eigenvalue scan inside the band (descriptive)",
}


def _clean(x: float) -> float | None:
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    return x


@dataclass
class VerdictRecord:
    check_id: str
    parameters: dict[str, Any]
    lhs: float
    rhs: float
    status: str
    provenance: str
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance anchor {self.provenance!r}")
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def margin(self) -> float:
        return float(self.rhs) - float(self.lhs)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "check_id": self.check_id,
            "parameters": _jsonable(self.parameters),
            "lhs": _clean(self.lhs),
            "rhs": _clean(self.rhs),
            "margin": _clean(self.margin),
            "status": self.status,
            "provenance": self.provenance,
            "details": _jsonable(self.details),
        }


def inequality_record(check_id: str, parameters: dict[str, Any], lhs: float,
                      rhs: float, provenance: str, slack: float = SLACK,
                      **details: Any) -> VerdictRecord:
    """Build a record whose status is ``lhs <= rhs * (1 + slack)``."""
    ok = bool(lhs <= rhs * (1.0 + slack)) if rhs >= 0 else bool(lhs <= rhs * (1.0 - slack))
    return VerdictRecord(check_id, dict(parameters), float(lhs), float(rhs),
                         PASS if ok else FAIL, provenance, dict(details))


def _jsonable(obj: Any) -> Any:
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _clean(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj
