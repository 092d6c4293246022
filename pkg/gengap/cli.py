"""Command line front end for gengap.

every subcommand builds a FreeProductProblem (or reads a certificate), dispatches to the closed formulas,
the synthesis or the verifier, and prints a JSON report (or a table with --pretty). Reports are cached
on disk when a cache directory is configured.

Example usage:

    gengap relation --factors "C2xZ,C3xZ"
    gengap gap --factors "C2*C3" --pretty
    gengap --cache-dir /tmp/gengap synthesize --factors "C2,C3" --module augmentation
"""

import json
import sys
import time
from dataclasses import dataclass, replace
from math import gcd
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from gengap.cache import ResultCache, cache_key
from gengap.config import Settings
from gengap.errors import GengapError, HypothesisViolation, ProblemSchemaError
from gengap.formulas import (
    FormulaReport,
    FreeProductProblem,
    bridson_tweedale,
    component_count,
    component_lattice,
    coprime_augmentation,
    coprime_relation,
    d_induced,
    gap_zero_by_quotient,
    mixed_augmentation,
    mixed_relation,
    nilpotent_gap_zero,
    parse_group,
    relation_generator_count,
    resolution_kernel_count,
    split_factors,
)
from gengap.gring import FoxVector, IdentityContext, verify_identity
from gengap.groups import (
    CyclicTimesZFactor,
    FiniteFactor,
    is_nilpotent,
    min_generators_group,
    primes_of,
    smallest_prime_outside,
)
from gengap.synth import (
    INCOMPLETE,
    REFUTED,
    certificate_from_dict,
    check_good,
    identity_suite,
    synthesize_generators,
    verify_certificate,
)
from loguru import logger

# --------------------------------------------------------------------------- session


def _plain(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def _normalised(report: Dict[str, Any]) -> Dict[str, Any]:
    return json.loads(json.dumps(report, sort_keys=True, default=_plain))


@dataclass
class Session:
    settings: Settings
    cache: ResultCache
    pretty: bool = False
    out: Optional[Path] = None
    timings: bool = True

    def run(self, command: str, request: Dict[str, Any], compute: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
        start = time.perf_counter()
        key = cache_key({"command": command, "seed": self.settings.seed, **request})
        report = self.cache.load(key)
        cached = report is not None
        if report is None:
            report = _normalised(compute())
            self.cache.store(key, report)
        if self.timings:
            report = dict(report, timings={"seconds": round(time.perf_counter() - start, 4), "cached": cached})
        self.emit(report)
        return report

    def emit(self, report: Dict[str, Any]) -> None:
        text = json.dumps(report, sort_keys=True, indent=2, default=_plain)
        if self.out is not None:
            self.out.write_text(text + "\n", encoding="utf-8")
            logger.info(f"report written to {self.out}")
        if self.pretty:
            _print_table(report)
        elif self.out is None:
            click.echo(text)


def _print_table(report: Dict[str, Any]) -> None:
    click.echo(f"problem: {report.get('problem', report.get('command'))}")
    click.echo(f"result:  {report.get('result')}")
    for key in ("formula", "provenance"):
        if key in report:
            click.echo(f"{key}: {report[key]}")
    rows = report.get("per_prime") or []
    if rows:
        click.echo(f"{'p':>6} {'sum':>5}  components")
        for row in rows:
            components = " ".join(str(c) for c in row.get("components") or [])
            click.echo(f"{row['p']:>6} {row['sum']:>5}  {components}")
    for line in report.get("hypotheses") or []:
        click.echo(f"  - {line}")
    for entry in report.get("checks") or report.get("entries") or []:
        mark = "ok" if entry.get("holds", entry.get("ok")) else "FAIL"
        click.echo(f"  [{mark}] {entry['name']}")


class GengapGroup(click.Group):
    """Maps library errors to their exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except GengapError as error:
            click.echo(f"error: {error}", err=True)
            ctx.exit(error.exit_code)


# --------------------------------------------------------------------------- parsing


def _int_list(_ctx: click.Context, _param: click.Parameter, value: Optional[str]) -> Tuple[int, ...]:
    if not value:
        return ()
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma separated integers, got '{value}'")


def _load_json(path: Path, field: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as error:
        raise ProblemSchemaError(f"cannot read {path}: {error}", field)


def load_problem(
    factors: Optional[str], module: Optional[str], stage: Optional[int], presentation_file: Optional[Path]
) -> Tuple[FreeProductProblem, Dict[str, Any]]:
    """A problem from the inline factor grammar, optionally completed (or replaced) by a JSON file."""
    data: Dict[str, Any] = {}
    if presentation_file is not None:
        loaded = _load_json(presentation_file, "presentation_file")
        if not isinstance(loaded, dict):
            raise ProblemSchemaError("the problem file must hold a JSON object", "presentation_file")
        data.update(loaded)
    if factors:
        data["factors"] = split_factors(factors)
    if module == "kernel":
        if stage is None:
            raise ProblemSchemaError("kernel modules need --stage", "module.kernel")
        data["module"] = {"kernel": stage}
    elif module is not None:
        data["module"] = module
    problem = FreeProductProblem.from_dict(data)
    logger.debug(f"problem {problem.describe()}")
    return problem, data


def problem_options(func: Callable) -> Callable:
    func = click.option("--prime-support", callback=_int_list, help="extra primes to tabulate, e.g. 5,7")(func)
    func = click.option(
        "--presentation-file",
        type=click.Path(exists=True, dir_okay=False, path_type=Path),
        help="JSON problem file: factors, module and presentations",
    )(func)
    func = click.option("--factors", help='free factors, e.g. "C2xZ,C3xZ" or "C2*C3"')(func)
    return func


def module_option(func: Callable) -> Callable:
    func = click.option("--stage", type=int, help="resolution stage s for kernel modules")(func)
    func = click.option(
        "--module",
        type=click.Choice(["augmentation", "relation", "kernel"]),
        help="module kind; defaults to the problem file, else augmentation",
    )(func)
    return func


# --------------------------------------------------------------------------- reports


def _coprime(orders: Sequence[int]) -> bool:
    return all(gcd(orders[i], orders[j]) == 1 for i in range(len(orders)) for j in range(i + 1, len(orders)))


def _nilpotent_factor(factor) -> bool:
    return not isinstance(factor, FiniteFactor) or is_nilpotent(factor.group)


def augmentation_formula(problem: FreeProductProblem) -> FormulaReport:
    orders = [f.group.order for f in problem.factors]
    if _coprime(orders):
        if all(isinstance(f, FiniteFactor) for f in problem.factors):
            return coprime_augmentation(problem)
        if all(_nilpotent_factor(f) for f in problem.factors):
            return mixed_augmentation(problem)
    return d_induced(problem)


def relation_formula(problem: FreeProductProblem) -> FormulaReport:
    orders = [f.group.order for f in problem.factors]
    if _coprime(orders):
        if all(isinstance(f, FiniteFactor) for f in problem.factors):
            return coprime_relation(problem)
        if all(isinstance(f, CyclicTimesZFactor) for f in problem.factors):
            return mixed_relation(problem)
    return d_induced(problem)


def per_prime_rows(problem: FreeProductProblem, primes: Sequence[int]) -> List[Dict[str, Any]]:
    rows = []
    for p in sorted(set(primes)):
        components = [component_count(problem, i, p) for i in range(problem.n)]
        rows.append({"p": p, "sum": sum(components), "components": components})
    return rows


def formula_report(
    command: str, problem: FreeProductProblem, formula: FormulaReport, extra_primes: Sequence[int] = ()
) -> Dict[str, Any]:
    return {
        "command": command,
        "problem": problem.describe(),
        "result": formula.value,
        "formula": formula.formula,
        "argmax": list(formula.argmax),
        "derived": formula.derived,
        "per_prime": per_prime_rows(problem, list(formula.table) + list(extra_primes)),
        "hypotheses": list(formula.transcript),
        "provenance": "formula",
    }


def gap_report(problem: FreeProductProblem, extra_primes: Sequence[int] = ()) -> Dict[str, Any]:
    formula = augmentation_formula(problem)
    report = formula_report("gap", problem, formula, extra_primes)
    d_group = formula.derived.get("d_group", sum(min_generators_group(f) for f in problem.factors))
    gap = formula.derived.get("gap", d_group - formula.value)
    report.update({"result": gap, "d_augmentation": formula.value, "d_group": d_group})
    if all(_nilpotent_factor(f) for f in problem.factors):
        criterion = nilpotent_gap_zero(problem.factors)
        report["nilpotent_criterion"] = criterion.to_dict()
        report["factor_gaps"] = [gap_zero_by_quotient(f).to_dict() for f in problem.factors]
        if criterion.criterion_met and gap != 0:
            report["hypotheses"].append(f"criterion predicts gap 0 but the formula gives {gap}")
    return report


def _certificate_exit(status: str, refuted_code: int) -> int:
    if status == INCOMPLETE:
        return 2
    if status == REFUTED:
        return refuted_code
    return 0


# --------------------------------------------------------------------------- commands


@click.group(cls=GengapGroup)
@click.option("--log-level", help="loguru level; defaults to $GENGAP_LOG or WARNING")
@click.option("--seed", type=int, help="seed for the randomised searches; defaults to $GENGAP_SEED or 0")
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), help="defaults to $GENGAP_CACHE_DIR")
@click.option("--no-cache", is_flag=True, help="neither read nor write cached reports")
@click.option("--pretty", is_flag=True, help="print a table instead of JSON")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="also write the JSON report here")
@click.option("--no-timings", is_flag=True, help="leave timings out of the report")
@click.pass_context
def cli(
    ctx: click.Context,
    log_level: Optional[str],
    seed: Optional[int],
    cache_dir: Optional[Path],
    no_cache: bool,
    pretty: bool,
    out: Optional[Path],
    no_timings: bool,
) -> None:
    """Minimal generator counts of modules over free products of groups."""
    settings = Settings.from_env(seed=seed, cache_dir=cache_dir, log_level=log_level.upper() if log_level else None)
    logger.remove()
    logger.add(sys.stderr, level=settings.log_level)
    cache = ResultCache(None if no_cache else settings.cache_dir)
    ctx.obj = Session(settings, cache, pretty, out, not no_timings)


@cli.command()
@problem_options
@click.pass_obj
def augmentation(session: Session, factors: str, presentation_file: Optional[Path], prime_support: Tuple[int, ...]) -> None:
    """d_G(ΔG) for the free product of the factors."""
    problem, request = load_problem(factors, "augmentation", None, presentation_file)
    session.run(
        "augmentation",
        {"problem": request, "primes": list(prime_support)},
        lambda: formula_report("augmentation", problem, augmentation_formula(problem), prime_support),
    )


@cli.command()
@problem_options
@click.pass_obj
def relation(session: Session, factors: str, presentation_file: Optional[Path], prime_support: Tuple[int, ...]) -> None:
    """d_G(R̄) for the free product presented by the free product of the factor presentations."""
    problem, request = load_problem(factors, "relation", None, presentation_file)
    session.run(
        "relation",
        {"problem": request, "primes": list(prime_support)},
        lambda: formula_report("relation", problem, relation_formula(problem), prime_support),
    )


@cli.command()
@problem_options
@click.option("--stage", type=int, required=True, help="resolution stage s")
@click.pass_obj
def kernel(
    session: Session, factors: str, presentation_file: Optional[Path], prime_support: Tuple[int, ...], stage: int
) -> None:
    """d_G(ker θ_s) for the free product of the standard periodic resolutions."""
    problem, request = load_problem(factors, "kernel", stage, presentation_file)
    session.run(
        "kernel",
        {"problem": request, "primes": list(prime_support)},
        lambda: formula_report("kernel", problem, resolution_kernel_count(problem, stage), prime_support),
    )


@cli.command()
@problem_options
@click.pass_obj
def gap(session: Session, factors: str, presentation_file: Optional[Path], prime_support: Tuple[int, ...]) -> None:
    """gap(G) = d(G) - d_G(ΔG), with the gap-zero criteria for nilpotent factors."""
    problem, request = load_problem(factors, "augmentation", None, presentation_file)
    session.run("gap", {"problem": request, "primes": list(prime_support)}, lambda: gap_report(problem, prime_support))


@cli.command("good-check")
@problem_options
@module_option
@click.pass_obj
def good_check(
    session: Session,
    factors: str,
    presentation_file: Optional[Path],
    prime_support: Tuple[int, ...],
    module: Optional[str],
    stage: Optional[int],
) -> None:
    """Check that the module of a single finite factor is good for π(G), tested at --prime-support."""
    problem, request = load_problem(factors, module, stage, presentation_file)
    if problem.n != 1 or not isinstance(problem.factors[0], FiniteFactor):
        raise HypothesisViolation("good-check takes exactly one finite factor")
    claimed = sorted(primes_of(problem.factors[0].group))
    tested = sorted(set(claimed) | set(prime_support)) if prime_support else claimed + [smallest_prime_outside(claimed)]

    def compute() -> Dict[str, Any]:
        witness = check_good(component_lattice(problem, 0), claimed, tested, session.settings)
        return {
            "command": "good-check",
            "problem": problem.describe(),
            "result": witness.delta,
            "certificate": witness.to_dict(),
            "hypotheses": [f"claimed π = {claimed}, tested at {tested}"],
            "provenance": "certificate-verified",
        }

    session.run("good-check", {"problem": request, "tested": tested}, compute)


@cli.command()
@problem_options
@module_option
@click.option("--depth-cap", type=int, help="largest window weight tried by the verifier")
@click.option("--no-verify", is_flag=True, help="skip verification of the synthesized set")
@click.pass_context
def synthesize(
    ctx: click.Context,
    factors: str,
    presentation_file: Optional[Path],
    prime_support: Tuple[int, ...],
    module: Optional[str],
    stage: Optional[int],
    depth_cap: Optional[int],
    no_verify: bool,
) -> None:
    """Build an explicit generating set of size d_G(M) and certify it."""
    session: Session = ctx.obj
    settings = replace(session.settings, depth_cap=depth_cap) if depth_cap is not None else session.settings
    problem, request = load_problem(factors, module, stage, presentation_file)

    def compute() -> Dict[str, Any]:
        cert = synthesize_generators(problem, settings, verify=not no_verify)
        verified = cert.verification is not None and cert.verification.verified
        return {
            "command": "synthesize",
            "problem": problem.describe(),
            "result": cert.size,
            "per_prime": per_prime_rows(problem, problem.support() + list(prime_support)),
            "hypotheses": list(cert.provenance["formula"]["transcript"]),
            "certificate": cert.to_dict(),
            "provenance": "certificate-verified" if verified else "formula",
        }

    report = session.run(
        "synthesize", {"problem": request, "depth_cap": settings.depth_cap, "verify": not no_verify}, compute
    )
    verification = report["certificate"].get("verification")
    if verification:
        ctx.exit(_certificate_exit(verification["status"], refuted_code=3))


@cli.command()
@problem_options
@module_option
@click.option(
    "--certificate",
    "certificate_file",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="a certificate, or a synthesize report holding one",
)
@click.option("--depth-cap", type=int, help="largest window weight tried by the verifier")
@click.pass_context
def verify(
    ctx: click.Context,
    factors: str,
    presentation_file: Optional[Path],
    prime_support: Tuple[int, ...],
    module: Optional[str],
    stage: Optional[int],
    certificate_file: Path,
    depth_cap: Optional[int],
) -> None:
    """Re-check a stored certificate over growing windows."""
    session: Session = ctx.obj
    problem, request = load_problem(factors, module, stage, presentation_file)
    data = _load_json(certificate_file, "certificate")
    if isinstance(data, dict) and isinstance(data.get("certificate"), dict):
        data = data["certificate"]
    if not isinstance(data, dict):
        raise ProblemSchemaError("the certificate file must hold a JSON object", "certificate")
    cert = certificate_from_dict(data)

    def compute() -> Dict[str, Any]:
        result = verify_certificate(cert, problem, depth_cap, session.settings)
        return {
            "command": "verify",
            "problem": problem.describe(),
            "result": result.status,
            "size": cert.size,
            "verification": result.to_dict(),
            "provenance": "certificate-verified" if result.verified else "unverified",
        }

    depth = session.settings.depth_cap if depth_cap is None else depth_cap
    report = session.run("verify", {"problem": request, "certificate": data, "depth_cap": depth}, compute)
    ctx.exit(_certificate_exit(report["result"], refuted_code=1))


@cli.command("identity-check")
@click.option("--suite", is_flag=True, help="run the built-in identity suite")
@click.option("--orders", callback=_int_list, default="2,3", show_default=True, help="n for the C_n x Z checks")
@click.option("--group", "group_name", default="C2", show_default=True, help="group for --lhs/--rhs")
@click.option("--rank", type=int, default=1, show_default=True)
@click.option("--lhs", help="left side in the JSON prefix format")
@click.option("--rhs", help="right side in the JSON prefix format")
@click.pass_context
def identity_check(
    ctx: click.Context,
    suite: bool,
    orders: Tuple[int, ...],
    group_name: str,
    rank: int,
    lhs: Optional[str],
    rhs: Optional[str],
) -> None:
    """Verify ring identities exactly in Z[G x C^r]."""
    session: Session = ctx.obj
    if suite:

        def compute_suite() -> Dict[str, Any]:
            checks = [c.to_dict() for c in identity_suite(orders, (5, 7), session.settings)]
            return {"command": "identity-check", "result": all(c["holds"] for c in checks), "checks": checks}

        report = session.run("identity-check", {"suite": list(orders)}, compute_suite)
        ctx.exit(0 if report["result"] else 3)
    if lhs is None or rhs is None:
        raise ProblemSchemaError("give --suite, or both --lhs and --rhs", "lhs")
    try:
        left, right = json.loads(lhs), json.loads(rhs)
    except ValueError as error:
        raise ProblemSchemaError(f"expressions must be JSON: {error}", "lhs")
    context = IdentityContext(parse_group(group_name), rank)

    def compute() -> Dict[str, Any]:
        outcome = verify_identity(left, right, context)
        residue = outcome.residue
        text = [str(c) for c in residue.components] if isinstance(residue, FoxVector) else str(residue)
        return {"command": "identity-check", "result": outcome.holds, "residue": text}

    report = session.run("identity-check", {"group": group_name, "rank": rank, "lhs": left, "rhs": right}, compute)
    ctx.exit(0 if report["result"] else 1)


@cli.command()
@click.option("--m", "ms", callback=_int_list, required=True, help="the parameters m_i, e.g. 2,3")
@click.pass_obj
def bridson(session: Session, ms: Tuple[int, ...]) -> None:
    """d(R̄) for a free product of the groups Q_m with q_m = (m + 1)^m - 1 pairwise coprime."""

    def compute() -> Dict[str, Any]:
        formula = bridson_tweedale(ms)
        return {
            "command": "bridson",
            "problem": " * ".join(f"Q_{m}" for m in ms),
            "result": formula.value,
            "formula": formula.formula,
            "argmax": list(formula.argmax),
            "derived": formula.derived,
            "per_prime": [{"p": p, "sum": v} for p, v in sorted(formula.table.items())],
            "hypotheses": list(formula.transcript),
            "provenance": "formula",
        }

    session.run("bridson", {"m": list(ms)}, compute)


@cli.command()
def dfr() -> None:
    """Normal generator counts d_F(R) are not computed."""
    relation_generator_count()


# --------------------------------------------------------------------------- desk table


def _expect(name: str, expected: Any, compute: Callable[[], Any]) -> Dict[str, Any]:
    try:
        value = compute()
    except GengapError as error:
        value = f"{type(error).__name__}"
    return {"name": name, "expected": expected, "value": value, "ok": value == expected}


def _problem(factors: str, module: str = "augmentation") -> FreeProductProblem:
    return load_problem(factors, module, None, None)[0]


COPRIME_FAMILIES = (
    "C2,C3", "C2,C5", "C2,C3xC3", "C3,C5", "C5,C2xC2", "C2xC2,C3", "C2xC2,C3xC3", "C5,C3xC3",
    "C2,C3,C5", "C2xC2,C3,C5", "C2,C3xC3,C5", "C2xC2,C3xC3,C5",
)

# abelian factor specs whose gap-zero verdict is compared with the criterion
GAP_CORPUS = (
    "C2,C3", "C2xC2,C3", "C2xC2,C3xC3", "C2,C3,C5", "C2xC2,C3xC3,C5", "C2xC2,C3,C5xC5",
    "C2xZ,C3", "C2xZ,C3xZ", "Z,C2xC2", "C2xZ,C3xC3", "C5,C2xC2xZ", "C3xC3xZ,C2xZ,C5",
)


def desk_table() -> List[Dict[str, Any]]:
    entries = [
        _expect("(C2xZ)*(C3xZ) relation", 3, lambda: relation_formula(_problem("C2xZ,C3xZ", "relation")).value),
        _expect(
            "(C2xZ)*(C3xZ) relation per prime",
            {"2": 3, "3": 3, "5": 2},
            lambda: {str(p): v for p, v in relation_formula(_problem("C2xZ,C3xZ", "relation")).table.items()},
        ),
        _expect("C2xC2 * C3xC3 relation", 5, lambda: relation_formula(_problem("C2xC2,C3xC3", "relation")).value),
        _expect(
            "C2xC2 * C3xC3 * C5xC5 relation",
            7,
            lambda: relation_formula(_problem("C2xC2,C3xC3,C5xC5", "relation")).value,
        ),
        _expect("(C2xZ)*(C3xZ) augmentation", 3, lambda: augmentation_formula(_problem("C2xZ,C3xZ")).value),
        _expect("(C2xZ)*(C3xZ) gap", 1, lambda: gap_report(_problem("C2xZ,C3xZ"))["result"]),
        _expect("(C2xZ)*C3 augmentation", 3, lambda: augmentation_formula(_problem("C2xZ,C3")).value),
        _expect("(C2xZ)*C3 gap", 0, lambda: gap_report(_problem("C2xZ,C3"))["result"]),
        _expect("Q_2 * Q_3", 3, lambda: bridson_tweedale((2, 3)).value),
        _expect("Q_2 * Q_4", "HypothesisViolation", lambda: bridson_tweedale((2, 4)).value),
        _expect("d_F(R)", "RefusedComputation", relation_generator_count),
    ]
    for family in COPRIME_FAMILIES:
        for module, formula in (("augmentation", augmentation_formula), ("relation", relation_formula)):
            problem = _problem(family, module)
            entries.append(_expect(f"{family} {module}", d_induced(problem).value, lambda: formula(problem).value))
    for family in GAP_CORPUS:
        problem = _problem(family)
        verdict = nilpotent_gap_zero(problem.factors).criterion_met
        entries.append(_expect(f"{family} gap zero", verdict, lambda: gap_report(problem)["result"] == 0))
    return entries


@cli.command()
@click.pass_context
def report(ctx: click.Context) -> None:
    """Run the table of known values in one go."""
    session: Session = ctx.obj

    def compute() -> Dict[str, Any]:
        entries = desk_table()
        return {"command": "report", "result": all(e["ok"] for e in entries), "entries": entries}

    outcome = session.run("report", {}, compute)
    ctx.exit(0 if outcome["result"] else 3)


if __name__ == "__main__":
    cli()
