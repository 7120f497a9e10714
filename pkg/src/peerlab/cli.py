"""Command-line entry point.

Four subcommands: ``measure`` (information quantities of joint/tensor files),
``mechanism`` (payment runs over scenario files), ``verify`` (theorem
suites), and ``sweep`` (convergence tables).

Contract: machine-readable output goes to files or stdout, human-readable
messages to stderr.  Exit codes: 0 success, 1 mechanism-level error or suite
violations, 2 parse/configuration errors.  Every output file embeds the run
config and a sha256 of each input file; re-running an identical config
reproduces the output byte for byte (floats are serialized at full
round-trip precision and nothing clock-dependent is written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .agents import (
    PairwisePrior,
    WorldModelPrior,
    generate_reports,
    load_scenario,
)
from .errors import PeerLabError
from .measures import (
    ConvexGenerator,
    ScoringRule,
    bregman_mi,
    conditional_mi,
    f_mutual_information,
    shannon_mi,
)
from .mechanisms import (
    BtsReportProfile,
    bmi_mechanism_payments,
    bts_payments,
    bts_idealized_scores,
    ca_payments,
    fmi_mechanism_payments,
    md_payments,
    mip_expected_payments,
    optimal_predictions,
    payment_report_csv,
    payment_report_dict,
    sppm_expected_payments,
    sppm_payments,
)
from .probability import Distribution, JointDistribution, rng_from_seed
from .verify import CANONICAL_WORLD, SUITES, SuiteConfig, run_suite

SCHEMA_VERSION = 1

_GENERATORS = {g.value: g for g in ConvexGenerator}
_RULES = {r.value: r for r in ScoringRule}
_NATS = {"kl", "shannon", "log"}


class CliError(Exception):
    """Carries the exit code for configuration/parse failures."""

    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get("PEERLAB_OUT_DIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _emit(path: str | None, text: str) -> None:
    path = _resolve_out(path)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _record(config: dict, inputs: dict, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": config, "inputs": inputs, **body}


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


def _load_table(path: str) -> JointDistribution:
    doc = _load_json(path)
    if "table" not in doc:
        raise CliError(f"{path}: missing 'table' field")
    try:
        return JointDistribution(np.array(doc["table"], dtype=np.float64))
    except (PeerLabError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def cmd_measure(args) -> int:
    config = {
        "command": "measure",
        "mi": args.mi,
        "bregman": args.bregman,
        "joint": args.joint,
        "tensor": args.tensor,
    }
    if (args.mi is None) == (args.bregman is None):
        raise CliError("choose exactly one of --mi / --bregman")
    if (args.joint is None) == (args.tensor is None):
        raise CliError("choose exactly one of --joint / --tensor")
    path = args.joint or args.tensor
    table = _load_table(path)
    if args.joint and table.is_conditional:
        raise CliError(f"{path}: --joint expects a rank-2 table")
    if args.tensor and not table.is_conditional:
        raise CliError(f"{path}: --tensor expects a rank-3 table")
    inputs = {path: _sha256(path)}
    try:
        if args.mi == "shannon":
            value = conditional_mi(table, ConvexGenerator.KL) if table.is_conditional else shannon_mi(table)
            name = "shannon"
        elif args.mi:
            gen = _GENERATORS.get(args.mi)
            if gen is None:
                raise CliError(f"unknown --mi measure {args.mi!r}")
            value = conditional_mi(table, gen) if table.is_conditional else f_mutual_information(table, gen)
            name = f"mi-{gen.value}"
        else:
            rule = _RULES.get(args.bregman)
            if rule is None:
                raise CliError(f"unknown --bregman rule {args.bregman!r}")
            value = conditional_mi(table, rule) if table.is_conditional else bregman_mi(table, rule)
            name = f"bregman-{rule.value}"
    except PeerLabError as exc:
        _emit(args.out, _canonical(_record(config, inputs, {
            "error": {"type": type(exc).__name__, "message": str(exc)}})))
        return 1
    units = "nats" if (args.mi in _NATS or args.bregman == "log") else "dimensionless"
    _emit(args.out, _canonical(_record(config, inputs, {
        "measure": name, "value": float(value), "units": units})))
    return 0


# ---------------------------------------------------------------------------
# mechanism
# ---------------------------------------------------------------------------


def _load_bts_profile(path: str, alpha_override: float | None) -> tuple[BtsReportProfile, float]:
    doc = _load_json(path)
    try:
        profile = BtsReportProfile(
            np.array(doc["signals"], dtype=np.intp),
            tuple(Distribution(np.array(p, dtype=np.float64)) for p in doc["predictions"]),
        )
    except (KeyError, PeerLabError, ValueError) as exc:
        raise CliError(f"{path}: {exc}") from exc
    alpha = alpha_override if alpha_override is not None else float(doc.get("alpha", 3.0))
    return profile, alpha


def cmd_mechanism(args) -> int:
    config = {
        "command": "mechanism",
        "mechanism": args.mechanism,
        "scenario": args.scenario,
        "profile": args.profile,
        "measure": args.measure,
        "rule": args.rule,
        "T": args.T,
        "seed": args.seed,
        "exact": args.exact,
        "d": args.d,
        "alpha": args.alpha,
        "format": args.format,
    }
    inputs = {}
    body_error = None
    report = None
    try:
        if args.mechanism == "bts":
            if not args.profile:
                raise CliError("bts needs --profile FILE")
            inputs[args.profile] = _sha256(args.profile)
            profile, alpha = _load_bts_profile(args.profile, args.alpha)
            report = bts_payments(profile, alpha, seed=args.seed)
        else:
            if not args.scenario:
                raise CliError(f"{args.mechanism} needs --scenario FILE")
            inputs[args.scenario] = _sha256(args.scenario)
            try:
                scenario = load_scenario(args.scenario)
            except (KeyError, PeerLabError, ValueError) as exc:
                raise CliError(f"{args.scenario}: {exc}") from exc
            gen = _GENERATORS.get(args.measure or "tvd")
            rule = _RULES.get(args.rule or "log")
            if args.measure and gen is None:
                raise CliError(f"unknown --measure {args.measure!r}")
            if args.rule and rule is None:
                raise CliError(f"unknown --rule {args.rule!r}")
            if args.mechanism in ("mip", "fmi", "bmi"):
                measure = rule if args.mechanism == "bmi" else gen
                if args.mechanism == "mip" and args.rule and not args.measure:
                    measure = rule
                if args.exact or args.mechanism == "mip":
                    report = mip_expected_payments(scenario, measure)
                else:
                    reports = generate_reports(scenario, args.T, args.seed)
                    if args.mechanism == "fmi":
                        report = fmi_mechanism_payments(reports, gen, seed=args.seed)
                    else:
                        report = bmi_mechanism_payments(reports, rule, seed=args.seed)
            elif args.mechanism in ("md", "ca"):
                reports = generate_reports(scenario, args.T, args.seed)
                fn = md_payments if args.mechanism == "md" else ca_payments
                report = fn(reports, args.d, args.seed)
            elif args.mechanism == "sppm":
                known = PairwisePrior(scenario.prior.pair_joint(0, 1), symmetric=False)
                if args.exact:
                    report = sppm_expected_payments(scenario, known, rule)
                else:
                    reports = generate_reports(scenario, 1, args.seed)
                    report = sppm_payments(reports.entries[:, 0], known, rule, seed=args.seed)
            elif args.mechanism == "bts-idealized":
                if not isinstance(scenario.prior, WorldModelPrior):
                    raise CliError("bts-idealized needs a world-model prior")
                scores = bts_idealized_scores(scenario.prior, scenario.strategies)
                _emit(args.out, _canonical(_record(config, inputs, {
                    "information_score": scores.information_score,
                    "prediction_score": scores.prediction_score,
                })))
                return 0
            else:
                raise CliError(f"unknown mechanism {args.mechanism!r}")
    except PeerLabError as exc:
        body_error = {"type": type(exc).__name__, "message": str(exc)}
    if body_error is not None:
        _emit(args.out, _canonical(_record(config, inputs, {"error": body_error})))
        return 1
    if args.format == "csv":
        header = "# " + json.dumps(_record(config, inputs, {}), sort_keys=True)
        _emit(args.out, header + "\n" + payment_report_csv(report))
    else:
        _emit(args.out, _canonical(_record(config, inputs, {"report": payment_report_dict(report)})))
    return 0


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise CliError(f"unknown suite {args.suite!r}; known: {', '.join(sorted(SUITES))}")
    from .verify import default_config

    overrides = {"seed": args.seed}
    if args.instances is not None:
        overrides["instances"] = args.instances
    if args.equality_tol is not None:
        overrides["equality_tol"] = args.equality_tol
    if args.strictness_tol is not None:
        overrides["strictness_tol"] = args.strictness_tol
    try:
        config = default_config(args.suite, **overrides)
    except PeerLabError as exc:
        raise CliError(str(exc)) from exc
    verdict = run_suite(config)
    doc = verdict.to_dict()
    doc["schema_version"] = SCHEMA_VERSION
    _emit(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0 if verdict.passed else 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _parse_grid(text: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad --grid {text!r}: {exc}") from exc


def _fmi_gap_cell(scenario, gen, T: int, seed: int, exact: float) -> float:
    reports = generate_reports(scenario, T, seed)
    emp = float(fmi_mechanism_payments(reports, gen).payments[0])
    return abs(emp - exact)


def _bts_gap_cell(world, n_agents: int, seed: int, ideal: float, alpha: float) -> float:
    rng = rng_from_seed(seed)
    w = int(rng.choice(world.n_states, p=world.state_probs.weights))
    sig = rng.choice(world.alphabet_size, size=n_agents, p=world.states[w].weights)
    preds = optimal_predictions(world)
    profile = BtsReportProfile(sig, tuple(preds[s] for s in sig.tolist()))
    pay = bts_payments(profile, alpha, pairing="seeded-random-reference",
                       seed=int(rng.integers(2**31)), smoothing=0.5)
    return abs(float(pay.information_scores.mean()) - ideal)


def cmd_sweep(args) -> int:
    config = {
        "command": "sweep",
        "kind": args.kind,
        "scenario": args.scenario,
        "grid": args.grid,
        "seeds": args.seeds,
        "seed": args.seed,
        "measure": args.measure,
        "jobs": args.jobs,
    }
    grid = _parse_grid(args.grid)
    inputs = {}
    if args.kind == "fmi-gap":
        if not args.scenario:
            raise CliError("fmi-gap needs --scenario FILE")
        inputs[args.scenario] = _sha256(args.scenario)
        try:
            scenario = load_scenario(args.scenario)
        except (KeyError, PeerLabError, ValueError) as exc:
            raise CliError(f"{args.scenario}: {exc}") from exc
        gen = _GENERATORS.get(args.measure or "tvd")
        if gen is None:
            raise CliError(f"unknown --measure {args.measure!r}")
        exact = float(mip_expected_payments(scenario, gen).payments[0])

        def cell(g: int, s: int) -> float:
            return _fmi_gap_cell(scenario, gen, g, args.seed * 1_000_003 + g * 101 + s, exact)

    elif args.kind == "bts-gap":
        world = CANONICAL_WORLD
        if args.scenario:
            inputs[args.scenario] = _sha256(args.scenario)
            try:
                scenario = load_scenario(args.scenario)
            except (KeyError, PeerLabError, ValueError) as exc:
                raise CliError(f"{args.scenario}: {exc}") from exc
            if not isinstance(scenario.prior, WorldModelPrior):
                raise CliError("bts-gap needs a world-model prior")
            world = scenario.prior
        ideal = bts_idealized_scores(world).information_score

        def cell(g: int, s: int) -> float:
            return _bts_gap_cell(world, g, args.seed * 1_000_003 + g * 101 + s, ideal, 3.0)

    else:
        raise CliError(f"unknown sweep kind {args.kind!r}")

    points = [(g, s) for g in grid for s in range(args.seeds)]
    if args.jobs > 1 and points:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            values = dict(zip(points, pool.map(lambda p: cell(*p), points)))
    else:
        values = {p: cell(*p) for p in points}
    lines = ["# " + json.dumps(_record(config, inputs, {}), sort_keys=True), "grid,seed,value"]
    for g, s in points:
        lines.append(f"{g},{s},{values[(g, s)]!r}")
    _emit(args.out, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peerlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="information measures of joint/tensor files")
    p.add_argument("--mi", choices=sorted(_GENERATORS) + ["shannon"], default=None)
    p.add_argument("--bregman", choices=sorted(_RULES), default=None)
    p.add_argument("--joint", help="rank-2 table JSON file")
    p.add_argument("--tensor", help="rank-3 table JSON file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("mechanism", help="payment run over a scenario file")
    p.add_argument("--mechanism", required=True,
                   choices=["mip", "fmi", "bmi", "md", "ca", "sppm", "bts", "bts-idealized"])
    p.add_argument("--scenario")
    p.add_argument("--profile", help="signal/prediction profile JSON (bts)")
    p.add_argument("--measure", default=None, help="f generator (fmi/mip)")
    p.add_argument("--rule", default=None, help="scoring rule (bmi/sppm)")
    p.add_argument("-T", type=int, default=1000, help="questions to sample (empirical modes)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="exact expected payments")
    p.add_argument("--d", type=int, default=1, help="comparison-subset size (md/ca)")
    p.add_argument("--alpha", type=float, default=None, help="information-score weight (bts)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mechanism)

    p = sub.add_parser("verify", help="run a theorem-verification suite")
    p.add_argument("suite", help="suite id, e.g. dpi")
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--equality-tol", type=float, default=None)
    p.add_argument("--strictness-tol", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="convergence tables (long-format CSV)")
    p.add_argument("--kind", required=True, choices=["fmi-gap", "bts-gap"])
    p.add_argument("--scenario")
    p.add_argument("--grid", default="", help="comma-separated grid, e.g. 1000,10000")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"peerlab: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
