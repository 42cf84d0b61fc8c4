"""Verification harness: registry runs and identity checks.

Every check returns a :class:`CheckResult`; the CLI prints them as a table
and the acceptance tests assert on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Antipodal, HopfField, MapField, TangentJKField
from .invariants import (
    InvariantReport,
    invariants_at,
    lambda_rho,
    mirror_map,
    mirror_point,
    random_regular_pair,
    robust_hopf,
)
from .oracles import hopf_from_cycles
from .registry import ENTRIES, RegistryEntry, get_entry


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ExampleRow:
    entry: RegistryEntry
    report: InvariantReport
    oracle_lambda: int | None = None
    oracle_rho: int | None = None

    @property
    def mu_oracle(self) -> int | None:
        if self.report.mu_oracle is not None:
            return self.report.mu_oracle
        if self.oracle_lambda is not None and self.oracle_rho is not None:
            return self.oracle_lambda + self.oracle_rho
        return None

    @property
    def passed(self) -> bool:
        r = self.report
        ok = True
        if self.entry.expected is not None:
            ok &= (r.lambda_, r.rho, r.mu_from_sum) == tuple(self.entry.expected)
        if self.mu_oracle is not None:
            ok &= self.mu_oracle == r.mu_from_sum
        if self.oracle_lambda is not None:
            ok &= self.oracle_lambda == r.lambda_
        if self.oracle_rho is not None:
            ok &= self.oracle_rho == r.rho
        return bool(ok)


def run_entry(entry: RegistryEntry, seed: int = 0) -> ExampleRow:
    report = lambda_rho(entry.map, entry.point, seed=seed)
    row = ExampleRow(entry, report)
    ann = entry.oracle_annotations
    if "lambda" in ann:
        row.oracle_lambda = -hopf_from_cycles(*ann["lambda"], entry.point, seed=seed)
    if "rho" in ann:
        row.oracle_rho = hopf_from_cycles(*ann["rho"], entry.point, seed=seed)
    return row


def run_registry(names=None, seed: int = 0) -> list[ExampleRow]:
    entries = ENTRIES if not names else [get_entry(n) for n in names]
    return [run_entry(e, seed) for e in entries]


def format_table(rows: list[ExampleRow]) -> str:
    head = f"{'name':<16}{'lambda':>7}{'rho':>5}{'mu_sum':>8}{'mu_oracle':>11}  {'expected':<12}{'result':>6}"
    lines = [head]
    for row in rows:
        r = row.report
        exp = "-" if row.entry.expected is None else ",".join(map(str, row.entry.expected))
        mo = "-" if row.mu_oracle is None else str(row.mu_oracle)
        lines.append(
            f"{row.entry.name:<16}{r.lambda_:>7}{r.rho:>5}{r.mu_from_sum:>8}{mo:>11}  {exp:<12}"
            f"{'PASS' if row.passed else 'FAIL':>6}"
        )
    return "\n".join(lines)


# -- identities --------------------------------------------------------------


def check_tangent_field(seed: int = 0) -> CheckResult:
    hl = robust_hopf(TangentJKField("l"), seed=seed)
    hr = robust_hopf(TangentJKField("r"), seed=seed)
    return CheckResult("tangent-jk: H(r T) = 1 + H(l T)", hl == 0 and hr == 1, f"H(l T)={hl} H(r T)={hr}")


def check_antipodal(seed: int = 0, eps: float = 0.25) -> list[CheckResult]:
    out = []
    m = get_entry("ex47-F").map
    for label, g in (("hopf", HopfField()), ("ex47-F l-field", MapField(m, "l", eps=eps))):
        a = robust_hopf(g, seed=seed)
        b = robust_hopf(Antipodal(g), seed=seed)
        out.append(CheckResult(f"antipodal invariance ({label})", a == b, f"H={a} H(-g)={b}"))
    return out


def check_splitting(row: ExampleRow) -> CheckResult:
    r = row.report
    mu = row.mu_oracle if row.mu_oracle is not None else (row.entry.expected or (None, None, None))[2]
    ok = mu is not None and r.mu_from_sum == mu and r.tau_plus - r.tau_minus == 1 - mu
    return CheckResult(
        f"splitting ({row.entry.name})", bool(ok),
        f"lambda+rho={r.mu_from_sum} mu={mu} tau+-tau-={r.tau_plus - r.tau_minus}",
    )


def check_mirror(row: ExampleRow, seed: int = 0) -> CheckResult:
    e = row.entry
    mr = lambda_rho(mirror_map(e.map), mirror_point(e.point), seed=seed, with_oracle=False)
    r = row.report
    ok = (mr.lambda_, mr.rho) == (r.rho, r.lambda_)
    return CheckResult(f"mirror duality ({e.name})", ok,
                       f"({r.lambda_},{r.rho}) -> ({mr.lambda_},{mr.rho})")


def check_regular_values(row: ExampleRow, seed: int = 0, n_pairs: int = 3) -> CheckResult:
    e, r = row.entry, row.report
    rng = np.random.default_rng(seed + 1000)
    got = []
    for k in range(n_pairs):
        p, q = random_regular_pair(rng)
        lam, rho, _ = invariants_at(e.map, e.point, r.epsilon_used, p=p, q=q, seed=seed + k)
        got.append((lam, rho))
    ok = all(g == (r.lambda_, r.rho) for g in got)
    return CheckResult(f"regular-value independence ({e.name})", ok,
                       " ".join(f"({a},{b})" for a, b in got))


def check_eps_stability(row: ExampleRow) -> CheckResult:
    r = row.report
    d = r.diagnostics
    half = (d.get("eps_half_lambda"), d.get("eps_half_rho"))
    ok = half == (r.lambda_, r.rho)
    return CheckResult(f"eps stability ({row.entry.name})", ok,
                       f"eps={r.epsilon_used:g}: ({r.lambda_},{r.rho}) eps/2: {half}")


def run_identities(rows: list[ExampleRow] | None = None, seed: int = 0) -> list[CheckResult]:
    rows = rows if rows is not None else run_registry(seed=seed)
    out = [check_tangent_field(seed)]
    out += check_antipodal(seed)
    for row in rows:
        out.append(check_splitting(row))
        out.append(check_eps_stability(row))
        out.append(check_regular_values(row, seed))
        out.append(check_mirror(row, seed))
    return out
