"""12-lead assembly and the limb-lead linear identities.

Only 8 channels of a standard 12-lead recording are electrically
independent: I, II and the six precordials V1..V6. The remaining limb
leads are linear combinations (Einthoven's triangle and Goldberger's
augmented leads), which this module derives and verifies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .integrate import DEFAULT_INIT, SamplingGrid, State, integrate_euler
from .model import EdmParams, RhythmParams

LEAD_NAMES = ("I", "II", "III", "aVR", "aVL", "aVF",
              "V1", "V2", "V3", "V4", "V5", "V6")

#: Leads synthesized by direct integration; the other four are derived.
FREE_LEADS = ("I", "II", "V1", "V2", "V3", "V4", "V5", "V6")
DERIVED_LEADS = ("III", "aVR", "aVL", "aVF")

LEAD_INDEX = {name: i for i, name in enumerate(LEAD_NAMES)}


def check_lead(name: str) -> str:
    if name not in LEAD_INDEX:
        raise ValueError(f"unknown lead {name!r}")
    return name


@dataclass(frozen=True)
class LeadRelation:
    """target = beta*src1 + gamma*src2, an exact limb-lead identity."""

    target: str
    src1: str
    beta: float
    src2: str
    gamma: float

    def __post_init__(self):
        for lead in (self.target, self.src1, self.src2):
            check_lead(lead)
        if self.target in (self.src1, self.src2):
            raise ValueError("relation target cannot be one of its sources")
        if self.beta == 0.0 and self.gamma == 0.0:
            raise ValueError("relation coefficients cannot both be zero")


_RELATIONS = (
    LeadRelation("I", "II", 1.0, "III", -1.0),
    LeadRelation("II", "I", 1.0, "III", 1.0),
    LeadRelation("III", "II", 1.0, "I", -1.0),
    LeadRelation("aVR", "I", -0.5, "II", -0.5),
    LeadRelation("aVL", "I", 0.5, "III", -0.5),
    LeadRelation("aVF", "II", 0.5, "III", 0.5),
)


def limb_relations() -> tuple[LeadRelation, ...]:
    """The six limb-lead identities, one per limb lead."""
    return _RELATIONS


def relation_for(target: str) -> LeadRelation:
    for rel in _RELATIONS:
        if rel.target == target:
            return rel
    raise ValueError(f"no limb relation with target {target!r}")


@dataclass
class Heartbeat:
    """One cardiac cycle: a 12 x L matrix in millivolts plus metadata."""

    grid: SamplingGrid
    leads: np.ndarray  # shape (12, L), rows ordered as LEAD_NAMES
    label: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.leads, dtype=float)
        if arr.shape != (12, self.grid.L):
            raise ValueError(f"leads must be 12 x {self.grid.L}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("lead samples must be finite")
        self.leads = arr

    def lead(self, name: str) -> np.ndarray:
        return self.leads[LEAD_INDEX[check_lead(name)]]


def derive_limb_rows(lead_i: np.ndarray, lead_ii: np.ndarray) -> dict[str, np.ndarray]:
    """III, aVR, aVL, aVF from leads I and II.

    These are the unique closed forms in terms of (I, II) consistent with
    all six limb identities: III = II - I, aVR = -(I + II)/2,
    aVL = I - II/2, aVF = II - I/2.
    """
    return {
        "III": lead_ii - lead_i,
        "aVR": -0.5 * (lead_i + lead_ii),
        "aVL": lead_i - 0.5 * lead_ii,
        "aVF": lead_ii - 0.5 * lead_i,
    }


def synthesize_heartbeat(lead_params: dict[str, EdmParams],
                         rhythm: RhythmParams,
                         grid: SamplingGrid,
                         gains: dict[str, float] | None = None,
                         init: State = DEFAULT_INIT,
                         label: str | None = None) -> Heartbeat:
    """Integrate the 8 free leads and derive the 4 dependent limb leads.

    lead_params must contain an entry for every free lead; gains (mV per
    model unit) default to 1.0 per lead. The derived rows satisfy the limb
    identities exactly, mirroring how clinical hardware records 8 channels
    and computes the rest.
    """
    gains = gains or {}
    rows: dict[str, np.ndarray] = {}
    for name in FREE_LEADS:
        if name not in lead_params:
            raise ConfigurationError(f"missing parameter set for lead {name}")
        traj = integrate_euler(lead_params[name], rhythm, grid, init)
        rows[name] = float(gains.get(name, 1.0)) * traj.z
    rows.update(derive_limb_rows(rows["I"], rows["II"]))
    matrix = np.vstack([rows[name] for name in LEAD_NAMES])
    return Heartbeat(grid=grid, leads=matrix, label=label)


@dataclass
class ConsistencyReport:
    """Per-relation worst-case deviations from the limb identities."""

    deviations: dict[str, float]  # keyed by relation target
    tol: float
    passed: bool

    def __str__(self) -> str:
        worst = max(self.deviations.values())
        status = "pass" if self.passed else "FAIL"
        return f"lead consistency {status} (worst {worst:.3e} mV, tol {self.tol:.1e})"


def check_lead_consistency(beat: Heartbeat, tol: float) -> ConsistencyReport:
    """Max absolute violation of each limb identity; pass iff all <= tol."""
    devs = {}
    for rel in _RELATIONS:
        lhs = beat.lead(rel.target)
        rhs = rel.beta * beat.lead(rel.src1) + rel.gamma * beat.lead(rel.src2)
        devs[rel.target] = float(np.max(np.abs(lhs - rhs)))
    return ConsistencyReport(deviations=devs, tol=tol,
                             passed=all(d <= tol for d in devs.values()))
