from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .errors import ParseError, TwistLabError
from .modular import (
    DEFAULT_COEFFICIENTS,
    LATTICE_CUTOFF,
    EisensteinDescriptor,
    IdentityRecord,
    fricke_residual_eisenstein,
    lattice_sum_oracle,
    verify_identity,
)
from .numerics import PrecisionContext, format_value
from .qseries import QPoint, eisenstein_value
from .spectral import TraceRequest, log_trace_pmn, trace_p2, trace_pmn_blocks


logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
TABLE_FILES = ("single_twist.txt", "double_twist.txt")
DISPLAY_FILE = "displays.txt"
FRICKE_POINTS = 3
LATTICE_TOLERANCE = 1e-4

CorpusKind = Literal["eta-tables", "fricke", "spectral", "all"]


# Loading

def _rows(path: Path, width: int) -> Iterable[Tuple[int, List[str]]]:
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != width:
            raise ParseError(f"{path.name}:{lineno}: expected {width} fields, got {len(fields)}")
        yield lineno, fields


def load_table_records(path: Path) -> List[IdentityRecord]:
    """Rows ``id | level | weight | D1 | D2 | quotient | tag``."""
    records = []
    for lineno, (id_, level, weight, d1, d2, quotient, tag) in _rows(path, 7):
        try:
            records.append(
                IdentityRecord.from_table_row(
                    id_, int(level), int(weight), int(d1), int(d2), quotient, source=tag
                )
            )
        except ValueError as exc:
            raise ParseError(f"{path.name}:{lineno}: {exc}") from exc
    return records


def load_display_records(path: Path) -> List[IdentityRecord]:
    """Rows ``id | lhs | rhs | tag``."""
    return [
        IdentityRecord(id=id_, lhs=lhs, rhs=rhs, source=tag)
        for _, (id_, lhs, rhs, tag) in _rows(path, 4)
    ]


def load_corpus(data_dir: Path | None = None) -> List[IdentityRecord]:
    data_dir = data_dir or DATA_DIR
    records: List[IdentityRecord] = []
    for name in TABLE_FILES:
        records.extend(load_table_records(data_dir / name))
    records.extend(load_display_records(data_dir / DISPLAY_FILE))
    ids = [r.id for r in records]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise ParseError(f"duplicate corpus ids: {', '.join(duplicates)}")
    logger.debug("Loaded %d identity records from %s", len(records), data_dir)
    return records


def corpus_descriptors(data_dir: Path | None = None) -> List[EisensteinDescriptor]:
    """Distinct (m, D1, D2) of the eta tables, in file order."""
    seen: Dict[Tuple[int, int, int], EisensteinDescriptor] = {}
    data_dir = data_dir or DATA_DIR
    for name in TABLE_FILES:
        for record in load_table_records(data_dir / name):
            d = record.descriptor
            if d is not None:
                seen.setdefault((d.m, d.d1, d.d2), d)
    return list(seen.values())


# Results

class RecordResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    kind: str
    passed: bool
    seconds: float
    detail: str = ""
    data: Dict[str, Any] = Field(default_factory=dict)


class CorpusSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    results: List[RecordResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def counts(self) -> Dict[str, int]:
        good = sum(r.passed for r in self.results)
        return {"total": len(self.results), "passed": good, "failed": len(self.results) - good}

    def merged(self, other: "CorpusSummary") -> "CorpusSummary":
        return CorpusSummary(results=sorted(self.results + other.results, key=lambda r: r.id))


def _timed(id_: str, kind: str, job: Callable[[], Tuple[bool, str, Dict[str, Any]]]) -> RecordResult:
    start = time.perf_counter()
    try:
        passed, detail, data = job()
    except TwistLabError as exc:
        logger.warning("%s raised %s: %s", id_, type(exc).__name__, exc)
        passed, detail, data = False, f"{type(exc).__name__}: {exc}", {}
    return RecordResult(
        id=id_,
        kind=kind,
        passed=passed,
        seconds=round(time.perf_counter() - start, 4),
        detail=detail,
        data=data,
    )


def _run(jobs: List[Tuple[str, str, Callable]], workers: int) -> CorpusSummary:
    if workers <= 1:
        results = [_timed(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _timed(*job), jobs))
    failed = [r.id for r in results if not r.passed]
    if failed:
        logger.info("%d of %d records failed: %s", len(failed), len(results), ", ".join(failed))
    return CorpusSummary(results=sorted(results, key=lambda r: r.id))


# Eta tables and displays

def verify_eta_tables(
    n_max: int = DEFAULT_COEFFICIENTS, jobs: int = 1, data_dir: Path | None = None
) -> CorpusSummary:
    def check(record: IdentityRecord) -> Callable:
        def job() -> Tuple[bool, str, Dict[str, Any]]:
            report = verify_identity(record, n_max=n_max)
            return report.passed, report.detail, report.to_record()

        return job

    work = [(r.id, "eta", check(r)) for r in load_corpus(data_dir)]
    return _run(work, jobs)


# Fricke involution

def sample_points(level: int, rng: random.Random, count: int, ctx: PrecisionContext) -> List[QPoint]:
    """Points near the Fricke fixed point i / sqrt(level)."""
    mp = ctx.mp
    points = []
    for _ in range(count):
        y = rng.uniform(0.7, 1.4) / level**0.5
        x = rng.uniform(-0.2, 0.2) / level**0.5
        points.append(QPoint.from_tau(mp.mpc(x, y), ctx))
    return points


def fricke_sweep(
    ctx: PrecisionContext,
    seed: int = 0,
    jobs: int = 1,
    descriptors: List[EisensteinDescriptor] | None = None,
    points: int = FRICKE_POINTS,
) -> CorpusSummary:
    """Fricke residual of every corpus G_m(chi1, chi2) at seeded random points."""
    rng = random.Random(seed)
    descriptors = descriptors if descriptors is not None else corpus_descriptors()
    work = []
    for d in descriptors:
        chi1, chi2 = d.characters()
        level = chi1.modulus * chi2.modulus
        for k, z in enumerate(sample_points(level, rng, points, ctx)):

            def job(d=d, chi1=chi1, chi2=chi2, z=z) -> Tuple[bool, str, Dict[str, Any]]:
                residual = abs(fricke_residual_eisenstein(d.m, chi1, chi2, z, ctx))
                scale = max(1, abs(eisenstein_value(d.m, chi1, chi2, z, ctx)))
                return (
                    bool(residual <= ctx.tolerance * scale),
                    "",
                    {"tau": format_value(z.tau, 12), "residual": format_value(residual, 5)["re"]},
                )

            work.append((f"fricke-{d.m}-{d.d1}-{d.d2}-{k}", "fricke", job))
    return _run(work, jobs)


def lattice_checks(cutoff: int = LATTICE_CUTOFF, jobs: int = 1) -> CorpusSummary:
    """Lattice sums against the q-series for two weight-3 corpus entries."""
    ctx = PrecisionContext.from_digits(15, guard_digits=5)
    work = []
    for d in (EisensteinDescriptor(m=3, d1=-3, d2=1), EisensteinDescriptor(m=3, d1=1, d2=-3)):
        chi1, chi2 = d.characters()
        z = QPoint.from_tau(ctx.mp.mpc(0.1, 0.45), ctx)

        def job(d=d, chi1=chi1, chi2=chi2, z=z) -> Tuple[bool, str, Dict[str, Any]]:
            lattice = lattice_sum_oracle(d.m, chi1, chi2, z, cutoff=cutoff, ctx=ctx)
            series = eisenstein_value(d.m, chi1, chi2, z, ctx)
            error = abs(lattice - series)
            return bool(error < LATTICE_TOLERANCE), "", {"error": format_value(error, 5)["re"]}

        work.append((f"lattice-{d.m}-{d.d1}-{d.d2}", "lattice", job))
    return _run(work, jobs)


# Spectral traces

def spectral_checks(ctx: PrecisionContext, seed: int = 0, jobs: int = 1) -> CorpusSummary:
    """Product against Lambert routes for P^2, P^{2,1}, P^{1,2} and P^{3,1}."""
    mp = ctx.mp
    rng = random.Random(seed)
    work = []

    def p2_job(z: QPoint) -> Callable:
        def job() -> Tuple[bool, str, Dict[str, Any]]:
            product = trace_p2(z, "product", ctx)
            lambert = trace_p2(z, "lambert", ctx)
            error = abs(product - lambert)
            return (
                bool(error <= ctx.tolerance * max(1, abs(product))),
                "",
                {"value": format_value(product, 20), "residual": format_value(error, 5)["re"]},
            )

        return job

    def blocks_job(m: int, n: int, z: QPoint) -> Callable:
        def job() -> Tuple[bool, str, Dict[str, Any]]:
            blocks = trace_pmn_blocks(TraceRequest(m=m, n=n, tau=z), ctx)
            return blocks.passed, "", blocks.to_record(20)

        return job

    def symmetry_job(z: QPoint) -> Callable:
        def job() -> Tuple[bool, str, Dict[str, Any]]:
            a = log_trace_pmn(TraceRequest(m=2, n=1, tau=z), "product", ctx)
            b = log_trace_pmn(TraceRequest(m=1, n=2, tau=z), "product", ctx)
            error = abs(a - b)
            return bool(error <= ctx.tolerance * max(1, abs(a))), "", {"residual": format_value(error, 5)["re"]}

        return job

    fixed = QPoint.from_tau(mp.mpc(0, 0.7), ctx)
    work.append(("spectral-p2-fixed", "spectral", p2_job(fixed)))
    for k in range(3):
        z = QPoint.from_tau(mp.mpc(rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.2)), ctx)
        work.append((f"spectral-p2-{k}", "spectral", p2_job(z)))
        work.append((f"spectral-symmetry-{k}", "spectral", symmetry_job(z)))
    block_point = QPoint.from_tau(mp.mpc(0, 0.8), ctx)
    for m, n in ((2, 1), (1, 2), (3, 1)):
        work.append((f"spectral-blocks-{m}-{n}", "spectral", blocks_job(m, n, block_point)))
    return _run(work, jobs)


def verify_corpus(
    kind: CorpusKind,
    ctx: PrecisionContext,
    n_max: int = DEFAULT_COEFFICIENTS,
    seed: int = 0,
    jobs: int = 1,
    lattice_cutoff: int = LATTICE_CUTOFF,
) -> CorpusSummary:
    summary = CorpusSummary(results=[])
    if kind in ("eta-tables", "all"):
        summary = summary.merged(verify_eta_tables(n_max=n_max, jobs=jobs))
    if kind in ("fricke", "all"):
        summary = summary.merged(fricke_sweep(ctx, seed=seed, jobs=jobs))
        summary = summary.merged(lattice_checks(cutoff=lattice_cutoff, jobs=jobs))
    if kind in ("spectral", "all"):
        summary = summary.merged(spectral_checks(ctx, seed=seed, jobs=jobs))
    logger.info("verify %s: %s", kind, summary.counts)
    return summary
