"""Registry of acceptance criteria and the verdict names that report on them."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Criterion:
    number: int
    verdicts: tuple[str, ...]
    experiment: str
    budget_seconds: float
    summary: str


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, ("gmv_exact", "cocycle_exact", "change_of_var_exact"), "verify", 10,
              "exact identity suites on F2 and F3"),
    Criterion(2, ("xi_regimes",), "xi", 5, "Xi_T exact values and regime bands"),
    Criterion(3, ("lp_isometry", "duality"), "verify", 10,
              "L^p isometry and adjoint identity on 100 seeded triples per p"),
    Criterion(4, ("growth_band", "llogl_lower"), "growth", 60,
              "W^{log,p} norm growth linear in |g|; LlogL lower bound"),
    Criterion(5, ("logsob_heldout", "logsob_const_stable"), "logsob", 60,
              "empirical log-Sobolev constant: held-out and depth stability"),
    Criterion(6, ("theta_linear",), "multipliers", 30, "multiplier sup grows linearly"),
    Criterion(7, ("energy_values",), "verify", 10, "exact energies; naive equals aggregated"),
    Criterion(8, ("mixing_decay", "weakmix_l1"), "mixing", 10, "matrix coefficient decay and weak mixing"),
    Criterion(9, ("embedding_decay", "Nn_diverges"), "embedding", 30,
              "embedding spectrum decay and divergence of the cutoff mass"),
    Criterion(10, ("regularity_lemmas",), "regularity", 30, "tail integral bounds on sampled spaces"),
    Criterion(11, ("orlicz_basics",), "verify", 10, "Luxemburg norms, power identity, Hoelder"),
    Criterion(12, ("lr_exponential",), "xi", 10, "exponential growth on L^r"),
)

VERDICTS: dict[str, Criterion] = {v: c for c in CRITERIA for v in c.verdicts}


def criterion_for(verdict: str) -> Criterion:
    try:
        return VERDICTS[verdict]
    except KeyError:
        raise KeyError(f"verdict {verdict!r} is not registered") from None


def list_criteria() -> list[str]:
    return [f"{c.number:2d}  {c.experiment:<11s} {', '.join(c.verdicts):<45s} {c.summary}" for c in CRITERIA]
