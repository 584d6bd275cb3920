"""Command-line interface.

Subcommands::

    relustab certify    run selected tests at one (a, b) point; JSON lines
    relustab sweep      run the grid sweep from a config file
    relustab norm       print the hinf norm of the linear part
    relustab check-cert re-verify a stored certificate file

Exit codes: 0 success; 1 config/usage error; 2 solver-failure fraction
exceeded (or a certificate that fails re-verification); 3 inclusion-audit
violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .certify import (
    FEASIBLE,
    SOLVER_FAILURE,
    SolverOptions,
    TestId,
    certificate_from_dict,
    family_for_test,
    run_test,
    save_certificate,
    verify_certificate,
)
from .dynamics import hinf_norm
from .sweep import (
    ConfigError,
    ModelSpec,
    SweepConfig,
    audit_inclusions,
    compare_regions,
    emit_outputs,
    load_config,
    run_sweep,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURES = 2
EXIT_AUDIT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relustab",
        description="l2 stability certification of ReLU recurrent networks")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    common_model = argparse.ArgumentParser(add_help=False)
    common_model.add_argument("--config", help="config file (YAML)")
    common_model.add_argument("--a", type=float, default=None,
                              help="builtin model parameter a")
    common_model.add_argument("--b", type=float, default=None,
                              help="builtin model parameter b")

    p_certify = sub.add_parser(
        "certify", parents=[common_model],
        help="run stability tests at a single point")
    p_certify.add_argument("--tests", default=None,
                           help="comma-separated tests (SG, I, II, III, IV)")
    p_certify.add_argument("--seed", type=int, default=None,
                           help="accepted for config symmetry; unused")
    p_certify.add_argument("--cert-out", default=None,
                           help="write feasible certificates as JSON "
                                "(suffixed per test when several)")

    p_sweep = sub.add_parser("sweep", help="run the (a, b) grid sweep")
    p_sweep.add_argument("--config", required=True, help="config file (YAML)")
    p_sweep.add_argument("--tests", default=None,
                         help="override the config's test list")
    p_sweep.add_argument("--workers", type=int, default=None,
                         help="override the config's parallelism")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="override the config's seed")

    sub.add_parser("norm", parents=[common_model],
                   help="print the hinf norm of the linear part")

    p_check = sub.add_parser(
        "check-cert", parents=[common_model],
        help="re-verify a stored certificate file")
    p_check.add_argument("--cert", required=True,
                         help="certificate JSON to verify")
    return parser


def _model_from_args(args) -> ModelSpec:
    spec = ModelSpec()
    if getattr(args, "config", None):
        spec = load_config(args.config).model
    if args.a is not None or args.b is not None:
        if not spec.builtin:
            raise ConfigError(
                "--a/--b apply only to the builtin model")
        spec = dataclasses.replace(
            spec,
            a=spec.a if args.a is None else args.a,
            b=spec.b if args.b is None else args.b)
    return spec


def _options_from_config(args) -> SolverOptions:
    if getattr(args, "config", None):
        return load_config(args.config).solver
    return SolverOptions()


def _parse_test_list(raw: str) -> list[TestId]:
    tokens = [tok for tok in raw.replace(",", " ").split() if tok]
    if not tokens:
        raise ConfigError("--tests: expected at least one test name")
    tests = []
    for tok in tokens:
        t = TestId.parse(tok)
        if t not in tests:
            tests.append(t)
    return tests


def _cmd_certify(args) -> int:
    spec = _model_from_args(args)
    options = _options_from_config(args)
    if args.tests is not None:
        tests = _parse_test_list(args.tests)
    elif getattr(args, "config", None):
        tests = list(load_config(args.config).tests)
    else:
        tests = [TestId.SSG, TestId.L2P_SSG, TestId.SSG_ZF_POL,
                 TestId.SSG_ZF_POL_COP]
    model = spec.build()
    failures = 0
    multi = len(tests) > 1
    for test in tests:
        result = run_test(model, test, options)
        line = {
            "test": test.name,
            "status": result.status,
            "verified": result.verified,
            "margin": result.margin,
            "solve_ms": round(result.solve_ms, 3),
        }
        if result.detail:
            line["detail"] = result.detail
        print(json.dumps(line, sort_keys=True))
        if result.status == SOLVER_FAILURE:
            failures += 1
        if result.status == FEASIBLE and args.cert_out:
            cert = result.certificate
            if spec.builtin:
                cert.model_ref = {"a": spec.a, "b": spec.b}
            path = args.cert_out
            if multi:
                stem, dot, ext = path.rpartition(".")
                path = (f"{stem}_{test.name}{dot}{ext}" if dot
                        else f"{path}_{test.name}")
            save_certificate(cert, path)
            log.info("wrote certificate %s", path)
    return EXIT_FAILURES if failures else EXIT_OK


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.tests is not None:
        tests = tuple(_parse_test_list(args.tests))
        from .sweep import default_compare_pairs
        config = dataclasses.replace(
            config, tests=tests, compare=default_compare_pairs(tests))
    if args.workers is not None:
        config = dataclasses.replace(config, parallelism=args.workers)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    records = run_sweep(config)
    region_maps = [compare_regions(records, ta, tb)
                   for ta, tb in config.compare]
    written = emit_outputs(records, region_maps, config)
    for name, path in sorted(written.items()):
        log.info("wrote %s -> %s", name, path)

    n_failures = sum(1 for r in records if r.status == SOLVER_FAILURE)
    frac = n_failures / len(records) if records else 0.0
    audits = audit_inclusions(records)
    violations = [v for audit in audits for v in audit.violations]
    print(json.dumps({
        "records": len(records),
        "solver_failures": n_failures,
        "failure_fraction": round(frac, 6),
        "inclusion_violations": violations,
        "regions": {f"{rm.test_a.name}_vs_{rm.test_b.name}": rm.counts()
                    for rm in region_maps},
    }, sort_keys=True))
    if frac > config.failure_threshold:
        return EXIT_FAILURES
    if violations:
        return EXIT_AUDIT
    return EXIT_OK


def _cmd_norm(args) -> int:
    spec = _model_from_args(args)
    print(f"{hinf_norm(spec.build()):.6f}")
    return EXIT_OK


def _cmd_check_cert(args) -> int:
    with open(args.cert, "r", encoding="utf-8") as fh:
        cert = certificate_from_dict(json.load(fh))
    if cert.test is None:
        raise ConfigError(f"{args.cert}: certificate does not name its test")
    test = TestId.parse(cert.test)
    if cert.model_ref is not None and (args.a is None and args.b is None
                                       and not args.config):
        spec = ModelSpec(builtin=True, a=float(cert.model_ref["a"]),
                         b=float(cert.model_ref["b"]))
    else:
        spec = _model_from_args(args)
    model = spec.build()
    family = family_for_test(test, model.m)
    report = verify_certificate(model, family, cert)
    print(json.dumps({
        "cert": args.cert,
        "test": test.name,
        "verified": report.verified,
        "lmi_max_eig": report.lmi_max_eig,
        "worst_constraint_violation": report.worst_constraint_violation,
    }, sort_keys=True))
    return EXIT_OK if report.verified else EXIT_FAILURES


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; normalise to 1.
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "certify": _cmd_certify,
        "sweep": _cmd_sweep,
        "norm": _cmd_norm,
        "check-cert": _cmd_check_cert,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
