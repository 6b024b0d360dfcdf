"""Brute-force incentive audits: strategy-proofness and individual rationality."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from ..analysis import utility
from ..model import AuctionInstance, Outcome, informed_set
from .deviations import DEFAULT_EPSILON, MAX_NEIGHBORS, Deviation, deviation_set

MechanismFn = Callable[[AuctionInstance], Outcome]


class MechanismFailure(RuntimeError):
    """The mechanism raised while evaluating a deviation."""

    def __init__(self, deviation: Deviation | None, cause: Exception):
        where = "the reported profile" if deviation is None else f"deviation {deviation}"
        super().__init__(f"mechanism failed on {where}: {cause}")
        self.deviation = deviation
        self.cause = cause


@dataclass(frozen=True)
class DeviationReport:
    """A strictly profitable misreport."""

    buyer: int
    deviation: Deviation
    truthful_utility: Fraction
    deviant_utility: Fraction
    index: int = 0

    @property
    def gain(self) -> Fraction:
        return self.deviant_utility - self.truthful_utility


@dataclass(frozen=True)
class IRViolation:
    """A truthful buyer left with negative utility; ``rival`` is the misreport in force, if any."""

    buyer: int
    utility: Fraction
    rival: Deviation | None = None


@dataclass(frozen=True)
class AuditResult:
    sp: DeviationReport | None
    ir: IRViolation | None
    deviations: int

    @property
    def clean(self) -> bool:
        return self.sp is None and self.ir is None


def _run(mechanism: MechanismFn, instance: AuctionInstance, deviation: Deviation | None) -> Outcome:
    try:
        return mechanism(instance)
    except Exception as exc:  # noqa: BLE001 - re-raised with the deviation attached
        raise MechanismFailure(deviation, exc) from exc


def audit(
    mechanism: MechanismFn,
    instance: AuctionInstance,
    *,
    buyers: Iterable[int] | None = None,
    sp: bool = True,
    ir: bool = True,
    epsilon: Fraction = DEFAULT_EPSILON,
    max_neighbors: int = MAX_NEIGHBORS,
) -> AuditResult:
    """Search every buyer's deviation set for profitable misreports and IR failures.

    Rivals hold their declared reports. Each buyer is compared against its
    truthful report; the first violation in (buyer id, deviation index)
    order is kept. IR is checked for every truthful buyer under the
    declared profile and under every single-rival deviation visited.
    """
    alpha = getattr(mechanism, "alpha", None)
    focus = getattr(mechanism, "focus", None)
    honest = {
        i for i in instance.ids
        if instance.true_types is None or instance.true_types[i - 1] == instance.buyers[i - 1]
    }
    sp_report: DeviationReport | None = None
    ir_report: IRViolation | None = None
    evaluated = 0

    def check_ir_at(profile: AuctionInstance, outcome: Outcome, rival: Deviation | None) -> None:
        nonlocal ir_report
        if ir_report is not None:
            return
        for j in sorted(informed_set(profile)):
            if j in honest and (rival is None or j != rival.buyer):
                u = utility(profile, j, outcome)
                if u < 0:
                    ir_report = IRViolation(j, u, rival)
                    return

    if ir:
        check_ir_at(instance, _run(mechanism, instance, None), None)

    for i in sorted(instance.ids if buyers is None else buyers):
        if (not sp or sp_report is not None) and (not ir or ir_report is not None):
            break
        base = instance.truthful_for(i)
        truthful = _run(mechanism, base, None)
        u_true = utility(base, i, truthful)
        if ir:
            check_ir_at(base, truthful, None)
        extra = [p for p in truthful.net_payment.values() if p]
        for idx, dev in enumerate(
            deviation_set(
                base, i, alpha=alpha, epsilon=epsilon, max_neighbors=max_neighbors,
                focus=focus, extra_points=extra,
            )
        ):
            profile = base.with_declared(i, dev.as_type())
            outcome = _run(mechanism, profile, dev)
            evaluated += 1
            if sp and sp_report is None:
                u = utility(profile, i, outcome)
                if u > u_true:
                    sp_report = DeviationReport(i, dev, u_true, u, idx)
            if ir:
                check_ir_at(profile, outcome, dev)
            if (not sp or sp_report is not None) and (not ir or ir_report is not None):
                break
    return AuditResult(sp_report, ir_report, evaluated)


def check_strategy_proof(mechanism: MechanismFn, instance: AuctionInstance, **kwargs) -> DeviationReport | None:
    """First strictly profitable deviation, or None if the search finds none."""
    return audit(mechanism, instance, ir=False, **kwargs).sp


def check_ir(mechanism: MechanismFn, instance: AuctionInstance, **kwargs) -> IRViolation | None:
    return audit(mechanism, instance, sp=False, **kwargs).ir


def replay(mechanism: MechanismFn, instance: AuctionInstance, report: DeviationReport) -> tuple[Fraction, Fraction]:
    """Re-run both sides of a report; returns (truthful utility, deviant utility)."""
    base = instance.truthful_for(report.buyer)
    profile = base.with_declared(report.buyer, report.deviation.as_type())
    return (
        utility(base, report.buyer, mechanism(base)),
        utility(profile, report.buyer, mechanism(profile)),
    )


@dataclass
class CorpusSummary:
    instances: int = 0
    deviations: int = 0
    sp_violations: list[tuple[int, DeviationReport]] = field(default_factory=list)
    ir_violations: list[tuple[int, IRViolation]] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return len(self.sp_violations) + len(self.ir_violations)


def _audit_job(job: tuple[MechanismFn, AuctionInstance]) -> AuditResult:
    mechanism, instance = job
    return audit(mechanism, instance)


def audit_corpus(
    mechanism: MechanismFn,
    corpus: Sequence[AuctionInstance],
    workers: int = 1,
) -> CorpusSummary:
    """Audit every instance; results are merged in corpus order whatever the scheduling."""
    jobs = [(mechanism, inst) for inst in corpus]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_audit_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_audit_job(job) for job in jobs]
    summary = CorpusSummary()
    for idx, res in enumerate(results):
        summary.instances += 1
        summary.deviations += res.deviations
        if res.sp is not None:
            summary.sp_violations.append((idx, res.sp))
        if res.ir is not None:
            summary.ir_violations.append((idx, res.ir))
    return summary
