"""Command-line front end: ``divide``, ``prove4`` and ``search5``.

Exit codes: 0 success, 1 search found nothing, 2 bad input or usage,
3 a correctness check failed at runtime.
"""
from __future__ import annotations

import argparse
import random
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .allocation import Allocation
from .connected import (BranchScript, divide_3_connected, divide_4_connected, divide_n_connected,
                        divide_n_connected_improved)
from .entirecake import divide_entire
from .errors import ContradictionError, InputError
from .generate import random_profile
from .measure import ValueMeasure
from .proofsearch import (DEFAULT_PROFILE_BUDGET, prove_4agent, search_template, five_agent_template)
from .queries import EQUALIZE, EQUALIZE_STAR, MARK, EVAL, QueryLog
from .reductions import divide_4_disconnected, divide_n_disconnected

MODES = ("connected-n", "connected-3", "connected-4", "connected-n-improved",
         "disconnected-4", "disconnected-n", "entire")
LETTERS = "abcdefgh"


# ---------------------------------------------------------------- rationals

def parse_rational(text: str) -> Fraction:
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text.strip()):
        raise InputError(f"malformed rational {text!r} (expected p/q or an integer)")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise InputError(f"zero denominator in {text!r}") from None


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- valuation files

def parse_valuations(text: str, normalize: bool = False) -> tuple[list[str], list[ValueMeasure]]:
    """Read ``agents: n`` then one ``agent <name>: b0 d1 b1 ... dk bk`` line per agent."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InputError("empty valuation file")
    head = re.fullmatch(r"agents:\s*(\d+)", lines[0])
    if not head:
        raise InputError("first line must be 'agents: <n>'")
    n = int(head.group(1))
    names, measures = [], []
    for ln in lines[1:]:
        m = re.fullmatch(r"agent\s+(\S+)\s*:\s*(.*)", ln)
        if not m:
            raise InputError(f"bad agent line {ln!r}")
        name, nums = m.group(1), [parse_rational(t) for t in m.group(2).split()]
        if name in names:
            raise InputError(f"duplicate agent {name!r}")
        if len(nums) < 3 or len(nums) % 2 == 0:
            raise InputError(f"agent {name}: need b0 d1 b1 ... dk bk (odd count, at least 3)")
        bps, dens = nums[0::2], nums[1::2]
        try:
            meas = ValueMeasure(tuple(bps), tuple(dens))
        except ValueError as e:
            raise InputError(f"agent {name}: {e}") from None
        if meas.total != 1:
            if not normalize:
                raise InputError(f"agent {name}: total value is {fmt(meas.total)}, not 1 (see --normalize)")
            try:
                meas = meas.normalized()
            except ValueError as e:
                raise InputError(f"agent {name}: {e}") from None
        names.append(name)
        measures.append(meas)
    if len(names) != n:
        raise InputError(f"header says {n} agents but {len(names)} are listed")
    return names, measures


def format_valuations(names: Sequence[str], measures: Sequence[ValueMeasure]) -> str:
    out = [f"agents: {len(names)}"]
    for name, m in zip(names, measures):
        nums = [fmt(m.breakpoints[0])]
        for d, b in zip(m.densities, m.breakpoints[1:]):
            nums += [fmt(d), fmt(b)]
        out.append(f"agent {name}: " + " ".join(nums))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- dispatch

def _agent_range(mode: str, n: int) -> None:
    need = {"connected-3": (3, 3), "connected-4": (4, 4), "disconnected-4": (4, 4),
            "connected-n-improved": (4, None), "entire": (1, 4),
            "connected-n": (1, None), "disconnected-n": (1, None)}[mode]
    lo, hi = need
    if n < lo or (hi is not None and n > hi):
        want = str(lo) if lo == hi else f"{lo}..{hi}" if hi else f"at least {lo}"
        raise InputError(f"mode {mode} needs {want} agents, got {n}")


def bounds(mode: str, n: int, epsilon: Fraction) -> dict[str, Fraction]:
    """Guaranteed lower bounds (values) and upper bounds (pieces) for a mode, totals normalized to 1."""
    if mode == "connected-n":
        return {"pieces": Fraction(2 ** (n - 1)), "floor": Fraction(1, 2 ** (n - 1)),
                "vip": Fraction(1, 2 ** (n - 2) + 1) if n >= 2 else Fraction(1)}
    if mode == "connected-3":
        return {"floor": Fraction(1, 3)}
    if mode == "connected-4":
        return {"pieces": Fraction(7), "floor": Fraction(1, 7), "vip": Fraction(1, 4)}
    if mode == "connected-n-improved":
        return {"vip": 1 / (Fraction(3, 4) * 2 ** (n - 1) + 1)}
    if mode == "disconnected-4":
        return {"floor": Fraction(1, 4)}
    if mode == "disconnected-n":
        return {"floor": (1 - epsilon) / n}
    return {"floor": Fraction(1, n), "remainder": Fraction(0)}


def run_mode(mode: str, measures: Sequence[ValueMeasure], vip: int, epsilon: Fraction) -> Allocation:
    log = QueryLog()
    if mode == "connected-n":
        return divide_n_connected(measures, vip, log=log)
    if mode == "connected-3":
        return divide_3_connected(measures, log=log)
    if mode == "connected-4":
        return divide_4_connected(measures, vip, log=log)
    if mode == "connected-n-improved":
        return divide_n_connected_improved(measures, vip, log=log)
    if mode == "disconnected-4":
        return divide_4_disconnected(measures, log=log)
    if mode == "disconnected-n":
        return divide_n_disconnected(measures, epsilon, log=log)
    return divide_entire(measures, log=log)


def uses_vip(mode: str) -> bool:
    return mode in ("connected-n", "connected-4", "connected-n-improved")


def checks(alloc: Allocation, measures, mode: str, vip: int, epsilon: Fraction) -> list[tuple[str, bool]]:
    b = bounds(mode, len(measures), epsilon)
    out = [("envy-free", alloc.is_envy_free())]
    if "pieces" in b:
        out.append((f"pieces<={b['pieces']}", alloc.piece_count <= b["pieces"]))
    if "vip" in b:
        out.append((f"vip>={b['vip']}", alloc.value(vip) >= b["vip"]))
    if "floor" in b:
        out.append((f"floor>={b['floor']}", alloc.min_value() >= b["floor"]))
    if "remainder" in b:
        left = max(m.value(alloc.remainder) for m in measures)
        out.append(("remainder=0", left == 0))
    if mode.startswith("connected"):
        out.append(("connected", alloc.is_connected()))
    return out


# ---------------------------------------------------------------- reports

def _cells(cells) -> str:
    return ",".join(f"{fmt(lo)}:{fmt(hi)}" for lo, hi in cells)


def _cells_text(cells) -> str:
    return " ".join(f"[{lo}, {hi})" for lo, hi in cells) or "(nothing)"


def machine_report(alloc: Allocation, names, measures, mode, vip, epsilon, results) -> str:
    n = len(names)
    out = ["format=envycake-report-1", f"mode={mode}", f"agents={n}"]
    if uses_vip(mode):
        out.append(f"vip={names[vip]}")
    if mode == "disconnected-n":
        out.append(f"epsilon={fmt(epsilon)}")
    for i, name in enumerate(names):
        out += [f"agent.{i}.name={name}", f"agent.{i}.pieces={_cells(alloc.bundles[i])}",
                f"agent.{i}.value={fmt(alloc.value(i))}"]
    for i in range(n):
        for j in range(n):
            out.append(f"envy.{i}.{j}={fmt(alloc.envy[i][j])}")
    out += [f"floor={fmt(alloc.min_value())}", f"pieces={alloc.piece_count}",
            f"remainder={_cells(alloc.remainder)}"]
    for i in range(n):
        out.append(f"remainder.{i}={fmt(measures[i].value(alloc.remainder))}")
    for kind in (EVAL, MARK, EQUALIZE, EQUALIZE_STAR):
        out.append(f"queries.{kind}={alloc.log.total(kind)}")
    for key, val in bounds(mode, n, epsilon).items():
        out.append(f"bound.{key}={fmt(val)}")
    for label, ok in results:
        # keys must not contain '=', the bound itself is under bound.*
        out.append(f"check.{re.split('[<>=]', label)[0]}={'ok' if ok else 'FAIL'}")
    if "inner_runs" in alloc.info:
        out.append(f"inner_runs={alloc.info['inner_runs']}")
    for k, line in enumerate(alloc.trace):
        out.append(f"trace.{k}={line.strip()}")
    return "\n".join(out) + "\n"


def parse_report(text: str) -> dict[str, object]:
    """Inverse of the machine report: ``p/q`` values come back as Fractions, cells as interval lists."""
    out: dict[str, object] = {}
    for ln in text.splitlines():
        if not ln:
            continue
        key, _, val = ln.partition("=")
        if key.startswith("trace.") or key.startswith("check.") or key in ("format", "mode", "vip") \
                or key.endswith(".name"):
            out[key] = val
        elif key.endswith(".pieces") or key == "remainder":
            out[key] = [tuple(Fraction(x) for x in iv.split(":")) for iv in val.split(",") if iv]
        elif re.fullmatch(r"-?\d+/\d+", val):
            out[key] = Fraction(val)
        elif re.fullmatch(r"-?\d+", val):
            out[key] = int(val)
        else:
            out[key] = val
    return out


def text_report(alloc: Allocation, names, measures, mode, vip, epsilon, results) -> str:
    n = len(names)
    out = [f"mode: {mode}", f"agents: {n} ({' '.join(names)})"]
    if uses_vip(mode):
        out.append(f"vip: {names[vip]}")
    if mode == "disconnected-n":
        out.append(f"epsilon: {epsilon}")
    width = max(len(nm) for nm in names)
    for i, name in enumerate(names):
        out.append(f"  {name:<{width}}  value {alloc.value(i)}  gets {_cells_text(alloc.bundles[i])}")
    out.append("envy matrix (row agent's value of column agent's share):")
    cols = [[str(alloc.envy[i][j]) for i in range(n)] for j in range(n)]
    widths = [max(len(names[j]), *(len(c) for c in cols[j])) for j in range(n)]
    out.append("  " + " " * width + "  " + "  ".join(f"{names[j]:>{widths[j]}}" for j in range(n)))
    for i in range(n):
        out.append(f"  {names[i]:<{width}}  " + "  ".join(f"{cols[j][i]:>{widths[j]}}" for j in range(n)))
    out.append(f"floor: {alloc.min_value()}")
    out.append(f"pieces: {alloc.piece_count}")
    left = " ".join(str(m.value(alloc.remainder)) for m in measures)
    out.append(f"remainder: {_cells_text(alloc.remainder)} (worth {left})")
    snap = alloc.log.snapshot()
    out.append("queries: " + " ".join(f"{k}={v}" for k, v in snap.items()))
    if "inner_runs" in alloc.info:
        out.append(f"inner runs: {alloc.info['inner_runs']}")
    out.append("checks: " + "; ".join(f"{label} {'ok' if ok else 'FAILED'}" for label, ok in results))
    if alloc.trace:
        out.append("trace:")
        out += [f"  {line}" for line in alloc.trace]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- templates

def parse_template(text: str) -> tuple[int, list[BranchScript]]:
    """``agents: n`` (default 5) then one branch per line, e.g. ``b:Equalize(2); c:Equalize(2)``."""
    n, branches = 5, []
    for raw in text.splitlines():
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        head = re.fullmatch(r"agents:\s*(\d+)", ln)
        if head:
            if branches:
                raise InputError("'agents:' must come before the branches")
            n = int(head.group(1))
            continue
        steps = []
        for part in ln.split(";"):
            m = re.fullmatch(r"\s*([a-h])\s*:\s*(Equalize\*?)\((\d+)\)\s*", part)
            if not m:
                raise InputError(f"bad branch step {part.strip()!r}")
            if m.group(2) != "Equalize":
                raise InputError("templates may only use Equalize queries")
            agent, k = LETTERS.index(m.group(1)), int(m.group(3))
            if not 1 <= agent < n or k < 2:
                raise InputError(f"bad branch step {part.strip()!r} for {n} agents")
            steps.append((agent, EQUALIZE, k))
        branches.append(BranchScript(tuple(steps)))
    if not 3 <= n <= 8:
        raise InputError("templates need 3..8 agents")
    return n, branches


# ---------------------------------------------------------------- commands

def cmd_divide(args) -> int:
    epsilon = parse_rational(args.epsilon)
    if not 0 < epsilon < 1:
        raise InputError("--epsilon must lie strictly between 0 and 1")
    if args.input:
        try:
            text = Path(args.input).read_text()
        except OSError as e:
            raise InputError(f"cannot read {args.input}: {e.strerror}") from None
        names, measures = parse_valuations(text, args.normalize)
    else:
        if args.seed is None:
            raise InputError("give --input, or --seed to generate a random profile")
        n = args.agents or {"connected-3": 3}.get(args.mode, 4)
        measures = random_profile(random.Random(args.seed), n)
        names = [LETTERS[i] if i < len(LETTERS) else f"a{i}" for i in range(n)]
    _agent_range(args.mode, len(measures))
    vip = 0
    if args.vip is not None:
        if args.vip not in names:
            raise InputError(f"unknown VIP {args.vip!r}")
        vip = names.index(args.vip)
    alloc = run_mode(args.mode, measures, vip, epsilon)
    results = checks(alloc, measures, args.mode, vip, epsilon)
    render = machine_report if args.report == "machine" else text_report
    sys.stdout.write(render(alloc, names, measures, args.mode, vip, epsilon, results))
    failed = [label for label, ok in results if not ok]
    if failed:
        raise ContradictionError("guarantee violated: " + ", ".join(failed))
    return 0


def cmd_prove4(args) -> int:
    doc = prove_4agent(only=args.case)
    sys.stdout.write(doc.render(only=args.case))
    return 0


def cmd_search5(args) -> int:
    if args.template_file:
        try:
            n, template = parse_template(Path(args.template_file).read_text())
        except OSError as e:
            raise InputError(f"cannot read {args.template_file}: {e.strerror}") from None
    else:
        n, template = 5, five_agent_template()
    budget = None if args.budget == 0 else args.budget
    report = search_template(n, template, budget)
    skipped = len(report.skipped)
    print(f"template: {len(template)} branches, {n} agents; profiles checked: {report.checked}; "
          f"inconclusive (node budget {args.budget or 'unlimited'}): {skipped}")
    if report.counterexample is None:
        print("no counterexample" if report.conclusive
              else "no counterexample found, but some profiles were not settled")
        return 1
    print("counterexample: every branch can fail under")
    print(report.counterexample.describe())
    return 0


def _case(text: str) -> int:
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a case number: {text!r}") from None
    if not 1 <= k <= 24:
        raise argparse.ArgumentTypeError("cases are numbered 1..24")
    return k


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="envycake", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("divide", help="divide a cake described by a valuation file")
    d.add_argument("--input", help="valuation file: 'agents: n' then 'agent <name>: b0 d1 b1 ... dk bk'")
    d.add_argument("--mode", required=True, choices=MODES, help="division algorithm")
    d.add_argument("--epsilon", default="1/10", help="p/q in (0,1), used by disconnected-n (default 1/10)")
    d.add_argument("--vip", help="name of the agent favoured by connected-n, connected-4, connected-n-improved "
                                 "(default: the first agent; ignored by other modes)")
    d.add_argument("--report", choices=("text", "machine"), default="text",
                   help="text for people, machine for key=value lines with p/q rationals")
    d.add_argument("--normalize", action="store_true", help="rescale measures whose total is not 1")
    d.add_argument("--seed", type=int, help="without --input: generate a random profile from this seed")
    d.add_argument("--agents", type=int, help="agent count for --seed profiles (default 3 or 4 by mode)")
    d.set_defaults(func=cmd_divide)

    pr = sub.add_parser("prove4", help="print the 24-case four-agent proof")
    pr.add_argument("--case", type=_case, help="print only this case (1..24)")
    pr.set_defaults(func=cmd_prove4)

    s = sub.add_parser("search5", help="search profiles defeating every branch of a template "
                                       "(exit 1 when none is found)")
    s.add_argument("--template-file", help="'agents: n' (default 5) then one branch per line, "
                                           "e.g. 'b:Equalize(2); c:Equalize(2)'")
    s.add_argument("--budget", type=int, default=DEFAULT_PROFILE_BUDGET,
                   help=f"search nodes per profile before it is skipped as inconclusive "
                        f"(default {DEFAULT_PROFILE_BUDGET}; 0 for no cap)")
    s.set_defaults(func=cmd_search5)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"envycake: error: {e}", file=sys.stderr)
        return 2
    except ContradictionError as e:
        print(f"envycake: contradiction: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
