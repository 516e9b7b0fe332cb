"""Machine-readable reports over the verified pipeline, plus curve exports.

This is the packaging layer on top of :mod:`symcert.cases`.  One call
runs the whole pipeline for a nested-solid model — configuration build,
equivariance check, symmetry-adapted bases, block decomposition,
per-block kernel certificates, and the isolation of the sign change of
the shell mass ratio — and collects the outcome into a single
JSON-serializable report.  Two rules govern the format:

* every claim in a report points at an embedded, self-contained
  certificate that :func:`symcert.certify.replay` can re-derive;
* every decimal printed for human eyes is an outward rounding of an
  exact rational stored right next to it.

Reports are deterministic: two runs, even with different worker-pool
sizes, produce byte-identical serializations once the timing block is
normalized.

The curve exporter walks the exact mass curve over an equispaced
rational grid in the open unit interval and writes certified decimal
enclosures as CSV, one row per sample.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path

from gmpy2 import mpq

from .cases import (
    Case,
    DeltaResult,
    certify_equal_masses,
    find_delta,
    load_case,
    mass_data_at,
)
from .certify import Certificate
from .fields import format_exact, sign_of
from .groups import (
    DegenerateImage,
    NonzeroForbiddenBlock,
    NotEquivariant,
    ValidationFailed,
)

__all__ = [
    "CURVE_COLUMNS",
    "CaseReport",
    "CurveSample",
    "StageFailure",
    "decimal_enclosure",
    "decomposition_summary",
    "delta_summary",
    "export_curve",
    "run_case",
    "sample_curve",
]


class StageFailure(RuntimeError):
    """One stage of the report pipeline failed.

    Carries the ``stage`` name (build, symmetry check, basis, block
    decomposition, per-block certification, delta isolation) along with
    the original exception as ``cause``, so callers can tell where a run
    went wrong without parsing messages.
    """

    def __init__(self, case: str, stage: str, cause: BaseException):
        super().__init__(f"{case}: {stage} failed: {cause}")
        self.case = case
        self.stage = stage
        self.cause = cause


# The case constructor performs the first four stages internally; each
# stage announces its own failure through a dedicated exception type.
_BUILD_STAGES = (
    (NotEquivariant, "symmetry check"),
    (DegenerateImage, "basis"),
    (NonzeroForbiddenBlock, "block decomposition"),
    (ValidationFailed, "build"),
)


def _stage_of(exc: BaseException) -> str:
    for etype, stage in _BUILD_STAGES:
        if isinstance(exc, etype):
            return stage
    return "build"


# ---------------------------------------------------------------------------
# outward decimal rounding
# ---------------------------------------------------------------------------


def _fixed_point(scaled, digits: int) -> str:
    """Render ``scaled / 10**digits`` as a fixed-point decimal string."""
    sign = "-" if scaled < 0 else ""
    mag = abs(int(scaled))
    if digits == 0:
        return f"{sign}{mag}"
    whole, frac = divmod(mag, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def decimal_enclosure(lo, hi, digits: int = 4) -> tuple[str, str]:
    """Round ``[lo, hi]`` outward to fixed-point decimals.

    The left endpoint rounds down and the right endpoint rounds up, so
    the printed pair brackets every number of the input interval — in
    particular any exact value quoted next to it stays inside.
    """
    lo, hi = mpq(lo), mpq(hi)
    if lo > hi:
        raise ValueError("interval endpoints out of order")
    if digits < 0:
        raise ValueError("digits must be nonnegative")
    scale = 10**digits
    slo, shi = lo * scale, hi * scale
    floor = slo.numerator // slo.denominator
    ceil = -((-shi.numerator) // shi.denominator)
    return _fixed_point(floor, digits), _fixed_point(ceil, digits)


# ---------------------------------------------------------------------------
# report fragments
# ---------------------------------------------------------------------------


def decomposition_summary(case: Case) -> dict:
    """The structural half of a report: multiplicities and block inventory.

    Block entries keep the decomposition's own order (trivial sector
    first); ``role`` separates the shared-mass block, whose kernel is
    the object of study, from the blocks that must be certified
    kernel-free.
    """
    blocks = []
    for name, blk in case.blocks.items():
        rows, cols = blk.shape
        blocks.append(
            {
                "name": name,
                "rows": rows,
                "cols": cols,
                "copies": case.copies[name],
                "role": "mass-curve" if name == case.trivial_name else "kernel",
            }
        )
    return {
        "case": case.name,
        "group": case.group.name,
        "multiplicities": {
            "mass_space": dict(sorted(case.theta_mults.items())),
            "equation_space": dict(sorted(case.tensor_mults.items())),
        },
        "blocks": blocks,
    }


def delta_summary(result: DeltaResult, digits: int = 4) -> dict:
    """The crossing half of a report: exact enclosures plus outward decimals."""
    return {
        "route": result.route,
        "digits": digits,
        "enclosure": [str(result.delta.lo), str(result.delta.hi)],
        "decimal": list(
            decimal_enclosure(result.delta.lo, result.delta.hi, digits)
        ),
        "reciprocal": [str(result.reciprocal.lo), str(result.reciprocal.hi)],
        "reciprocal_decimal": list(
            decimal_enclosure(result.reciprocal.lo, result.reciprocal.hi, digits)
        ),
    }


# ---------------------------------------------------------------------------
# the full case report
# ---------------------------------------------------------------------------


@dataclass
class CaseReport:
    """Everything one pipeline run certified, with replayable evidence.

    ``certificates`` maps stable reference keys — ``equal-masses:<block>``
    for the kernel certificates and ``delta:<claim>`` for the crossing
    argument — to the certificates backing the report's claims; the block
    inventory and the crossing section refer to those keys.  ``timing``
    holds wall-clock seconds per stage and is the only part of a report
    that varies between runs.
    """

    case: str
    group: str
    mass_multiplicities: dict[str, int]
    equation_multiplicities: dict[str, int]
    blocks: list[dict]
    equal_masses: bool
    delta: DeltaResult
    digits: int
    certificates: dict[str, Certificate]
    timing: dict[str, float]

    def to_json(self) -> dict:
        delta_doc = delta_summary(self.delta, self.digits)
        delta_doc["certificates"] = sorted(
            key for key in self.certificates if key.startswith("delta:")
        )
        return {
            "schema": "symcert-case-report/1",
            "case": self.case,
            "group": self.group,
            "multiplicities": {
                "mass_space": dict(sorted(self.mass_multiplicities.items())),
                "equation_space": dict(sorted(self.equation_multiplicities.items())),
            },
            "blocks": self.blocks,
            "equal_masses": {
                "verdict": self.equal_masses,
                "certificates": sorted(
                    key
                    for key in self.certificates
                    if key.startswith("equal-masses:")
                ),
            },
            "delta": delta_doc,
            "certificates": {
                key: cert.to_json() for key, cert in self.certificates.items()
            },
            "timing": self.timing,
        }

    def dumps(self, *, normalize_timing: bool = False) -> str:
        """Serialize the report; normalizing timing makes runs comparable."""
        doc = self.to_json()
        if normalize_timing:
            doc["timing"] = {key: 0.0 for key in doc["timing"]}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def certificate_filename(self, key: str) -> str:
        """Deterministic file name for one referenced certificate."""
        return f"{self.case}.{key.replace(':', '.')}.cert.json"

    def save(self, directory) -> Path:
        """Write the report plus one replayable file per certificate.

        Returns the report path; the certificate files land next to it
        under the names :meth:`certificate_filename` yields, ready for
        the ``replay`` command.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for key, cert in self.certificates.items():
            cert.save(directory / self.certificate_filename(key))
        path = directory / f"{self.case}.report.json"
        path.write_text(self.dumps(), encoding="utf-8")
        return path


def run_case(
    kind: str,
    *,
    digits: int = 4,
    max_depth: int | None = None,
    workers: int = 1,
    out: str | Path | None = None,
) -> CaseReport:
    """Run the whole verified pipeline for one model and report on it.

    Stages: build the configuration, check equivariance, construct the
    symmetry-adapted bases and the block decomposition (all inside the
    cached case constructor), certify every non-trivial block
    kernel-free, then isolate the sign change of the shell mass ratio.
    Any failure is re-raised as :class:`StageFailure` naming the stage.
    ``max_depth`` caps covering subdivision in both certification
    stages; leave it ``None`` to keep each stage's own default (a deeper
    cap makes discarded strategy attempts proportionally costlier).
    When ``out`` is given, the report and its certificate files are also
    written to that directory.
    """
    depth_kw = {} if max_depth is None else {"max_depth": max_depth}
    timing: dict[str, float] = {}
    start = time.perf_counter()
    try:
        case = load_case(kind)
    except (ValidationFailed, NotEquivariant, DegenerateImage, NonzeroForbiddenBlock) as exc:
        raise StageFailure(kind, _stage_of(exc), exc) from exc
    timing["decompose_s"] = round(time.perf_counter() - start, 3)

    mark = time.perf_counter()
    try:
        kernel_certs = certify_equal_masses(case, workers=workers, **depth_kw)
    except (ValueError, ZeroDivisionError) as exc:
        raise StageFailure(kind, "per-block certification", exc) from exc
    timing["certify_s"] = round(time.perf_counter() - mark, 3)

    mark = time.perf_counter()
    try:
        delta = find_delta(case, digits=digits, workers=workers, **depth_kw)
    except (ValueError, ZeroDivisionError) as exc:
        raise StageFailure(kind, "delta isolation", exc) from exc
    timing["delta_s"] = round(time.perf_counter() - mark, 3)
    timing["total_s"] = round(time.perf_counter() - start, 3)

    certificates: dict[str, Certificate] = {}
    for name, cert in kernel_certs.items():
        certificates[f"equal-masses:{name}"] = cert
    for name, cert in delta.certificates.items():
        certificates[f"delta:{name}"] = cert

    blocks = []
    for entry in decomposition_summary(case)["blocks"]:
        key = f"equal-masses:{entry['name']}"
        entry["certificate"] = key if key in certificates else None
        blocks.append(entry)

    report = CaseReport(
        case=case.name,
        group=case.group.name,
        mass_multiplicities=case.theta_mults,
        equation_multiplicities=case.tensor_mults,
        blocks=blocks,
        equal_masses=all(cert.verified for cert in kernel_certs.values()),
        delta=delta,
        digits=digits,
        certificates=certificates,
        timing=timing,
    )
    if out is not None:
        report.save(out)
    return report


# ---------------------------------------------------------------------------
# certified curve samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSample:
    """One certified point of the mass curve at a rational size ratio.

    The exact values come first, serialized over the closed alphabet of
    field elements; the rational enclosures bound them outward, and the
    decimal pairs round the enclosures outward once more, so every
    printed digit is certified.  ``sign`` is the exact sign of the
    outer-to-inner mass ratio.
    """

    t: mpq
    c_exact: str
    ratio_exact: str
    c_enclosure: tuple[mpq, mpq]
    ratio_enclosure: tuple[mpq, mpq]
    c_decimal: tuple[str, str]
    ratio_decimal: tuple[str, str]
    sign: int


CURVE_COLUMNS = ("t_num", "t_den", "c_lo", "c_hi", "ratio_lo", "ratio_hi", "ratio_sign")


def sample_curve(
    kind: str, samples: int, digits: int = 12, bits: int = 192
) -> list[CurveSample]:
    """Certified samples of ``c(t)`` and the mass ratio on a rational grid.

    The grid is equispaced in the open unit interval — ``t = k /
    (samples + 1)`` for ``k = 1 .. samples`` — with the endpoints
    excluded, since both shells degenerate there.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    case = load_case(kind)
    rows: list[CurveSample] = []
    for k in range(1, samples + 1):
        t = mpq(k, samples + 1)
        _, c_val, ratio = mass_data_at(case, t)
        c_lo, c_hi = c_val.interval(bits)
        r_lo, r_hi = ratio.interval(bits)
        rows.append(
            CurveSample(
                t=t,
                c_exact=format_exact(c_val),
                ratio_exact=format_exact(ratio),
                c_enclosure=(c_lo, c_hi),
                ratio_enclosure=(r_lo, r_hi),
                c_decimal=decimal_enclosure(c_lo, c_hi, digits),
                ratio_decimal=decimal_enclosure(r_lo, r_hi, digits),
                sign=sign_of(ratio),
            )
        )
    return rows


def export_curve(kind: str, samples: int, out, digits: int = 12) -> Path:
    """Write certified curve samples for one model as CSV.

    Columns: the sample's exact rational size ratio as numerator and
    denominator, outward decimal enclosures of the singular parameter
    ``c(t)`` and of the outer-to-inner mass ratio, and the ratio's exact
    sign.  The output is fully determined by the arguments, so repeated
    exports are byte-identical.
    """
    rows = sample_curve(kind, samples, digits=digits)
    out = Path(out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for sample in rows:
            writer.writerow(
                [
                    str(sample.t.numerator),
                    str(sample.t.denominator),
                    sample.c_decimal[0],
                    sample.c_decimal[1],
                    sample.ratio_decimal[0],
                    sample.ratio_decimal[1],
                    str(sample.sign),
                ]
            )
    return out
