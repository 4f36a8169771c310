"""Command-line front end.

    bellsim bell [--label K]
    bellsim dense-code --message 10
    bellsim teleport --state 0.6,0.8 --seed 7 --format json
    bellsim teleport-mixed --member 0.5:1,0 --member 0.5:0,1 --shots 10000
    bellsim nosignal-audit [--state RE,RE] [--no-measure]

Exit codes: 0 success, 1 internal invariant violation, 2 usage error.
"""

from __future__ import annotations

import argparse
from importlib import resources
import json
import re
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, TextIO

import numpy as np

from . import kets
from .gates import apply
from .measurement import RandomSource
from .nosignal import AuditScenario, distinguishability_game, mode_change_scenario, run_audit
from .protocols import (
    ProtocolTranscript,
    Step,
    display_scale,
    bell_state,
    dense_code,
    gram_matrix,
    run_shots,
    teleport,
    teleport_mixed,
)
from .statecore import KET_PLUS, Ensemble, InvariantViolation, PureState

NORM_SLACK = 1e-9

_NUM = r"(?:(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
_COMPLEX_RE = re.compile(rf"^(?:[+-]?{_NUM}(?:[+-]{_NUM}?i)?|[+-]?{_NUM}?i)$")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    seed: int = 0
    shots: int = 1
    format: str = "text"
    state: Optional[tuple[complex, complex]] = None
    message: Optional[str] = None
    ensemble: Optional[list[tuple[float, tuple[complex, complex]]]] = None
    label: Optional[int] = None
    exact: bool = False
    measure: bool = True
    workers: int = 1
    out: Optional[str] = None
    notes: list[str] = field(default_factory=list)


def parse_complex(text: str) -> complex:
    """``re`` or ``re±imi``, e.g. ``0.6``, ``0.5-0.5i``, ``-i``."""
    t = text.strip().replace(" ", "")
    if not _COMPLEX_RE.match(t):
        raise ValueError(f"malformed complex literal {text!r} (expected re or re±imi)")
    if t.endswith("i") and (len(t) == 1 or t[-2] in "+-"):
        t = t[:-1] + "1i"
    return complex(t.replace("i", "j"))


def _parse_pair(text: str, flag: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag}: expected two comma-separated amplitudes, got {text!r}")
    try:
        return parse_complex(parts[0]), parse_complex(parts[1])
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _normalize_pair(pair, flag: str, notes: list[str]) -> tuple[complex, complex]:
    norm = float(np.hypot(abs(pair[0]), abs(pair[1])))
    if norm == 0.0 or not np.isfinite(norm):
        raise UsageError(f"{flag}: zero state {kets.fmt_complex(pair[0])},{kets.fmt_complex(pair[1])} cannot be normalized")
    if abs(norm - 1.0) > NORM_SLACK:
        notes.append(f"{flag} {kets.fmt_complex(pair[0])},{kets.fmt_complex(pair[1])} rescaled by 1/{kets.fmt_real(norm)}")
    return pair[0] / norm, pair[1] / norm


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed (default 0)")
    common.add_argument("--shots", type=int, default=1, help="number of runs; shot i uses stream i")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--workers", type=int, default=1, help="threads for multi-shot runs")
    common.add_argument("--out", metavar="PATH", help="also write the json report here")

    parser = _Parser(prog="bellsim", description="Bell states, dense coding, teleportation and no-signaling audits.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    p = sub.add_parser("bell", parents=[common], help="print the four Bell states")
    p.add_argument("--label", type=int, choices=(1, 2, 3, 4))
    p = sub.add_parser("dense-code", parents=[common], help="send two bits through one qubit of B1")
    p.add_argument("--message", default="00", help="2-bit message (default 00)")
    p = sub.add_parser("teleport", parents=[common], help="teleport a qubit a|0>+b|1>")
    p.add_argument("--state", default="0.6,0.8", help="amplitudes a,b (default 0.6,0.8)")
    p = sub.add_parser("teleport-mixed", parents=[common], help="teleport members drawn from an ensemble")
    p.add_argument("--member", action="append", metavar="P:A,B", help="ensemble member; repeatable (default |0>,|1> at 1/2 each)")
    p.add_argument("--exact", action="store_true", help="weight every branch analytically instead of sampling")
    p = sub.add_parser("nosignal-audit", parents=[common], help="check Bob's reduced state against Alice's actions")
    p.add_argument("--state", help="phi for the phi ⊗ B1 scenario (default |+>)")
    p.add_argument("--no-measure", dest="measure", action="store_false", help="Alice applies XOR, H but does not measure")
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = _build_parser().parse_args(list(argv))
    cfg = RunConfig(ns.subcommand, ns.seed, ns.shots, ns.format, workers=ns.workers, out=ns.out)
    if not 0 <= cfg.seed < 1 << 64:
        raise UsageError(f"--seed: {cfg.seed} is not a 64-bit unsigned integer")
    if cfg.shots < 1:
        raise UsageError(f"--shots: must be a positive integer, got {cfg.shots}")
    if cfg.workers < 1:
        raise UsageError(f"--workers: must be a positive integer, got {cfg.workers}")
    if ns.subcommand == "bell":
        cfg.label = ns.label
    elif ns.subcommand == "dense-code":
        if len(ns.message) != 2 or set(ns.message) - {"0", "1"}:
            raise UsageError(f"--message: expected a 2-bit string such as 10, got {ns.message!r}")
        cfg.message = ns.message
    elif ns.subcommand == "teleport":
        cfg.state = _normalize_pair(_parse_pair(ns.state, "--state"), "--state", cfg.notes)
    elif ns.subcommand == "teleport-mixed":
        cfg.exact = ns.exact
        cfg.ensemble = _parse_members(ns.member or ["0.5:1,0", "0.5:0,1"], cfg.notes)
    elif ns.subcommand == "nosignal-audit":
        cfg.measure = ns.measure
        if ns.state is not None:
            cfg.state = _normalize_pair(_parse_pair(ns.state, "--state"), "--state", cfg.notes)
    return cfg


def _parse_members(specs: list[str], notes: list[str]) -> list[tuple[float, tuple[complex, complex]]]:
    members = []
    for spec in specs:
        prob_text, sep, pair_text = spec.partition(":")
        if not sep:
            raise UsageError(f"--member: expected P:A,B, got {spec!r}")
        try:
            prob = float(prob_text)
        except ValueError:
            raise UsageError(f"--member: malformed probability {prob_text!r}") from None
        if not 0.0 <= prob <= 1.0:
            raise UsageError(f"--member: probability {prob} outside [0, 1]")
        members.append((prob, _normalize_pair(_parse_pair(pair_text, "--member"), "--member", notes)))
    total = sum(p for p, _ in members)
    if abs(total - 1.0) > NORM_SLACK:
        raise UsageError(f"--member: probabilities sum to {total}, expected 1")
    return [(p / total, pair) for p, pair in members]


# ---------------------------------------------------------------------------
# report building


def _step_json(step) -> dict:
    return {
        "label": step.label,
        "ket": kets.format_ket(step.state, step.scale, step.group),
        "note": kets.scale_note(step.scale) if not step.note else step.note,
        "amplitudes": kets.vector_json(step.state.amplitudes),
    }


def _transcript_sections(tr: ProtocolTranscript) -> dict:
    out = {
        "input": tr.input,
        "steps": [_step_json(s) for s in tr.steps],
        "measurements": [m.as_dict() for m in tr.measurements],
    }
    if tr.correction is not None:
        out["correction"] = tr.correction
    if tr.fidelity is not None:
        out["fidelity"] = tr.fidelity
    return out


def _density_json(rho) -> list:
    return kets.matrix_json(rho.entries)


def _report_bell(cfg: RunConfig) -> dict:
    labels = [cfg.label] if cfg.label else [1, 2, 3, 4]
    states = [bell_state(k) for k in labels]
    steps = [
        {
            "label": f"B{k}",
            "ket": kets.format_ket(s, 1 / np.sqrt(2)),
            "note": "×1/√2",
            "amplitudes": kets.vector_json(s.amplitudes),
        }
        for k, s in zip(labels, states)
    ]
    dev = float(np.max(np.abs(gram_matrix(states) - np.eye(len(states)))))
    if dev > 1e-15:
        raise InvariantViolation(f"Bell states not orthonormal (Gram deviation {dev:.3e})")
    return {"steps": steps, "summary": {"gram_max_deviation": dev}}


def _report_dense(cfg: RunConfig) -> dict:
    runs = run_shots(lambda src: dense_code(cfg.message, src), cfg.shots, RandomSource(cfg.seed), cfg.workers)
    for bits, tr in runs:
        if bits != cfg.message:
            raise InvariantViolation(f"dense coding decoded {bits}, sent {cfg.message}")
        if any(m.probability != 1.0 for m in tr.measurements):
            raise InvariantViolation("dense coding measurement was not deterministic")
    bits, tr = runs[0]
    report = _transcript_sections(tr)
    report["message"] = cfg.message
    report["decoded"] = bits
    if cfg.shots > 1:
        report["summary"] = {"decoded_counts": dict(sorted(Counter(b for b, _ in runs).items()))}
    return report


def _report_teleport(cfg: RunConfig) -> dict:
    phi = PureState(list(cfg.state))
    runs = run_shots(lambda src: teleport(phi, src), cfg.shots, RandomSource(cfg.seed), cfg.workers)
    report = _transcript_sections(runs[0])
    if cfg.shots > 1:
        report["fidelity"] = min(tr.fidelity for tr in runs)
        report["summary"] = {
            "outcome_counts": dict(sorted(Counter(tr.outcome for tr in runs).items())),
            "min_fidelity": min(tr.fidelity for tr in runs),
        }
    return report


def _report_mixed(cfg: RunConfig) -> dict:
    source = Ensemble(tuple((p, PureState(list(pair))) for p, pair in cfg.ensemble))
    summary = teleport_mixed(source, cfg.shots, RandomSource(cfg.seed), exact=cfg.exact, workers=cfg.workers)
    if summary.min_fidelity < 1.0 - 1e-12:
        raise InvariantViolation(f"informed fidelity {summary.min_fidelity!r} below 1")
    picks = Counter(summary.picks)
    return {
        "input": " + ".join(f"{kets.fmt_real(p)}·[{kets.format_ket(s)}]" for p, s in source.members),
        "fidelity": summary.min_fidelity,
        "summary": {
            "mode": summary.mode,
            "source": [{"probability": p, "ket": kets.format_ket(s)} for p, s in source.members],
            "member_counts": [picks.get(i, 0) for i in range(len(source))],
            "uninformed_density": _density_json(summary.uninformed),
            "expected_density": _density_json(summary.expected),
            "max_entry_deviation": float(np.max(np.abs(summary.uninformed.entries - summary.expected.entries))),
            "uninformed_purity": summary.uninformed.purity(),
            "informed_min_fidelity": summary.min_fidelity,
        },
    }


def _report_audit(cfg: RunConfig) -> dict:
    phi = PureState(list(cfg.state)) if cfg.state else KET_PLUS
    sc = mode_change_scenario(phi, measures=cfg.measure)
    report = run_audit(sc)
    if report.signals:
        raise InvariantViolation(f"Bob's reduced state moved by trace distance {report.distance!r}")
    idle = AuditScenario(sc.joint_state, sc.alice_qubits)
    state = sc.joint_state
    steps = [_step_json(Step("joint state phi ⊗ B1", state, display_scale(state)))]
    for g, targets in sc.alice_program:
        state = apply(g, state, targets)
        label = f"Alice applies {g.name} to qubit{'s' if len(targets) > 1 else ''} {','.join(map(str, targets))}"
        steps.append(_step_json(Step(label, state, display_scale(state), group=len(sc.alice_qubits))))
    return {
        "input": f"phi = {kets.format_ket(phi)}",
        "steps": steps,
        "audit": {
            "alice_qubits": list(sc.alice_qubits),
            "bob_qubits": list(sc.bob_qubits),
            "alice_measures": sc.alice_measures,
            "trace_distance": report.distance,
            "rho_before": _density_json(report.rho_before),
            "rho_after": _density_json(report.rho_after),
            "purity_before": report.purity_before,
            "purity_after": report.purity_after,
            "distinguishability": distinguishability_game(sc, idle),
            "outcomes": [
                {
                    "outcome": e.outcome,
                    "probability": e.probability,
                    "purity": e.purity,
                    "rho_bob": _density_json(e.rho_bob),
                }
                for e in report.outcomes
            ],
        },
    }


_BUILDERS = {
    "bell": _report_bell,
    "dense-code": _report_dense,
    "teleport": _report_teleport,
    "teleport-mixed": _report_mixed,
    "nosignal-audit": _report_audit,
}


def build_report(cfg: RunConfig) -> dict:
    body = _BUILDERS[cfg.subcommand](cfg)
    report = {"protocol": cfg.subcommand, "seed": cfg.seed, "shots": cfg.shots}
    if cfg.notes:
        report["notes"] = list(cfg.notes)
    report.update(body)
    return report


def load_schema() -> dict:
    """JSON Schema every report validates against."""
    return json.loads(resources.files("bellsim").joinpath("report.schema.json").read_text(encoding="utf-8"))


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# text rendering


def _matrix_lines(m, indent: str = "    ") -> list[str]:
    rows = [[kets.fmt_complex(complex(*z)) for z in row] for row in m]
    width = max(len(c) for row in rows for c in row)
    return [indent + "[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in rows]


def render_text(report: dict) -> str:
    lines = [f"== {report['protocol']} (seed {report['seed']}, shots {report['shots']}) =="]
    for note in report.get("notes", []):
        lines.append(f"note: {note}")
    if "input" in report:
        lines.append(f"input: {report['input']}")
    for step in report.get("steps", []):
        lines.append(f"{step['label']}:")
        suffix = f"    {step['note']}" if step["note"] else ""
        lines.append(f"    {step['ket']}{suffix}")
    for m in report.get("measurements", []):
        qubits = ",".join(map(str, m["qubits"]))
        lines.append(f"measured qubit(s) {qubits}: {m['outcome']} with probability {kets.fmt_real(m['probability'])}")
    if "correction" in report:
        lines.append(f"correction: {report['correction']}")
    if "fidelity" in report:
        lines.append(f"fidelity: {kets.fmt_real(report['fidelity'])}")
    summary = report.get("summary")
    if summary:
        lines.append("summary:")
        for key, value in summary.items():
            if key.endswith("_density"):
                lines.append(f"  {key}:")
                lines.extend(_matrix_lines(value))
            elif isinstance(value, float):
                lines.append(f"  {key}: {kets.fmt_real(value)}")
            else:
                lines.append(f"  {key}: {value}")
    audit = report.get("audit")
    if audit:
        lines.append(f"Bob holds qubit(s) {','.join(map(str, audit['bob_qubits']))}")
        lines.append(f"rho_before (purity {kets.fmt_real(audit['purity_before'])}):")
        lines.extend(_matrix_lines(audit["rho_before"]))
        for e in audit["outcomes"]:
            head = f"outcome {e['outcome']}" if e["outcome"] else "no measurement"
            lines.append(
                f"{head}: probability {kets.fmt_real(e['probability'])}, Bob purity {kets.fmt_real(e['purity'])}"
            )
            lines.extend(_matrix_lines(e["rho_bob"]))
        lines.append(f"rho_after (purity {kets.fmt_real(audit['purity_after'])}):")
        lines.extend(_matrix_lines(audit["rho_after"]))
        lines.append(f"trace_distance: {kets.fmt_real(audit['trace_distance'])}")
        lines.append(f"distinguishability vs idle Alice: {kets.fmt_real(audit['distinguishability'])}")
    if "decoded" in report:
        lines.append(f"decoded: {report['decoded']}")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        report = build_report(cfg)
    except InvariantViolation as exc:
        print(f"bellsim: invariant violation: {exc}", file=stderr)
        return 1
    payload = to_json(report)
    stdout.write(payload if cfg.format == "json" else render_text(report))
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"bellsim: usage error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
