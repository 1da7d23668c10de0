"""Plain-text certificate files and re-checking them without solving.

A certificate is a sequence of ``key: value`` lines.  Exact values are
written as fractions; parameters also carry the decimal they were read
from.  With ``verbose`` the file additionally lists every nonempty cell and
every case program together with its dual (or Farkas) multipliers, which
:func:`recheck` verifies by substitution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .cells import BoundParams, build_cell, lemma1_form
from .certify import Certificate, case_program, merged_constraints
from .lp import LinearProgram, LPResult, Status, verify_result
from .numerics import AffineForm, format_decimal, format_fraction, to_rational

FORMAT = "sidonbound-certificate/1"


def _param_line(value, source=None) -> str:
    exact = format_fraction(value)
    return f"{source} = {exact}" if source is not None else exact


def _sources(params: BoundParams):
    src = {"tau": None, "alpha": [None] * params.K, "c": [None] * len(params.cs)}
    ai = ci = 0
    for kind, text in params.sources:
        if kind == "tau":
            src["tau"] = text
        elif kind == "alpha":
            src["alpha"][ai] = text
            ai += 1
        elif kind == "c":
            src["c"][ci] = text
            ci += 1
    return src


def certificate_lines(cert: Certificate, verbose: bool = False) -> list[str]:
    p = cert.params
    src = _sources(p)
    out = [
        f"format: {FORMAT}",
        f"arithmetic: {cert.arithmetic_mode}",
        f"tau: {_param_line(p.tau, src['tau'])}",
        f"g: {p.g}",
        f"K: {p.K}",
    ]
    out += [f"alpha[{j + 1}]: {_param_line(a, src['alpha'][j])}" for j, a in enumerate(p.alphas)]
    out += [f"c[{i + 1}]: {_param_line(c, src['c'][i])}" for i, c in enumerate(p.cs)]
    out += [f"cells[{i + 1}]: {n}" for i, n in enumerate(cert.cell_counts)]
    out += [
        f"feasible_combinations: {cert.feasible_combinations}",
        f"cases_examined: {cert.cases_examined}",
        f"feasible_cases: {cert.feasible_cases}",
        f"certified_bound: {format_fraction(cert.certified_bound)}",
        f"precision: {cert.places}",
        f"printed_bound: {cert.printed_bound}",
        f"worst_case: {cert.worst_case.case_id}",
        f"worst_governing: {cert.worst_case.governing}",
    ]
    out += [f"worst_cells[{i + 1}]: " + " ".join(map(str, s)) for i, s in enumerate(cert.worst_cells)]
    out += [f"witness[{j}]: {format_fraction(v)}" for j, v in sorted(cert.witness.items())]
    out += [f"bound[{i}]: {f.to_text()}" for i, f in enumerate(cert.bound_forms)]
    out += [f"note: {k} = {v}" for k, v in cert.notes]
    if verbose:
        if cert.cases is None:
            raise ValueError("verbose output needs a certificate computed with keep_cases")
        for i, table in enumerate(cert.cell_table):
            for idx, s in enumerate(table):
                out.append(f"cell[{i + 1}][{idx}]: " + " ".join(map(str, s)))
        for r in cert.cases:
            fields = [
                f"id={r.case_id}",
                "cells=" + ",".join(map(str, r.combination)),
                f"gov={r.governing}",
                f"status={r.status.value}",
            ]
            if r.value is not None:
                fields.append(f"value={format_fraction(r.value)}")
                fields.append("w=" + ",".join(format_fraction(r.witness[j]) for j in sorted(r.witness)))
            if r.multipliers is not None:
                fields.append("mu=" + ",".join(format_fraction(m) for m in r.multipliers))
            out.append("case: " + " ".join(fields))
    out.append("end")
    return out


def write_certificate(cert: Certificate, path=None, verbose: bool = False) -> str:
    text = "\n".join(certificate_lines(cert, verbose)) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_certificate(text: str) -> dict:
    """Split a certificate into scalar fields, indexed fields, cells and cases."""
    data: dict = {"indexed": {}, "cells": {}, "cases": [], "notes": []}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line == "end":
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: value'")
        if key == "case":
            data["cases"].append(dict(item.split("=", 1) for item in value.split()))
        elif key == "note":
            data["notes"].append(value)
        elif key.startswith("cell["):
            inst, idx = key[5:-1].split("][")
            data["cells"][int(inst), int(idx)] = tuple(int(v) for v in value.split())
        elif "[" in key:
            name, idx = key[:-1].split("[")
            data["indexed"].setdefault(name, {})[int(idx)] = value
        else:
            data[key] = value
    return data


def _exact(field_value: str):
    # "1.12733 = 112733/100000" or just "112733/100000"
    return to_rational(field_value.split("=")[-1].strip())


def params_from_certificate(data: dict) -> BoundParams:
    ix = data["indexed"]
    alphas = tuple(_exact(ix.get("alpha", {})[j]) for j in sorted(ix.get("alpha", {})))
    cs = tuple(_exact(ix.get("c", {})[i]) for i in sorted(ix.get("c", {})))
    return BoundParams(_exact(data["tau"]), alphas, cs, int(data["g"]))


@dataclass
class RecheckReport:
    ok: bool = True
    checks: list = field(default_factory=list)

    def record(self, name: str, passed: bool, detail: str = ""):
        self.checks.append((name, passed, detail))
        if not passed:
            self.ok = False

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'} {name}" + (f": {d}" if d else "")
                for name, ok, d in self.checks]


def recheck(text: str) -> RecheckReport:
    """Re-verify a certificate by substitution only (no linear programs are solved)."""
    rep = RecheckReport()
    try:
        data = parse_certificate(text)
        params = params_from_certificate(data)
    except (ValueError, KeyError) as exc:
        rep.record("parse", False, str(exc))
        return rep
    rep.record("parse", data.get("format") == FORMAT, data.get("format", "missing format"))
    ix = data["indexed"]

    bound = to_rational(data["certified_bound"])
    places = int(data["precision"])
    printed = data["printed_bound"]
    rep.record("printed_bound", printed == format_decimal(bound, places, "up")
               and to_rational(printed) >= bound, printed)

    witness = {j: to_rational(v) for j, v in ix.get("witness", {}).items()}
    rep.record("witness_complete", sorted(witness) == list(range(1, params.K + 1)))
    cube = [witness.get(j) for j in range(1, params.K + 1)]
    rep.record("witness_in_cube", None not in cube and all(
        0 <= a <= b <= 1 for a, b in zip([0] + cube, cube + [1])) if None not in cube else False)

    worst_cells = [tuple(int(v) for v in ix["worst_cells"][i].split())
                   for i in sorted(ix.get("worst_cells", {}))]
    if len(worst_cells) != len(params.cs):
        rep.record("worst_cells", False, "one interlacing per window ratio expected")
        return rep
    try:
        cells = [build_cell(s, c, params) for s, c in zip(worst_cells, params.cs)]
    except ValueError as exc:
        rep.record("worst_cells", False, str(exc))
        return rep
    rep.record("witness_in_cells", all(c.contains(witness) for c in cells))

    forms = [lemma1_form(params)] + [c.cell_function for c in cells]
    stored = [AffineForm.from_text(ix["bound"][i]) for i in sorted(ix.get("bound", {}))]
    rep.record("bound_forms", stored == forms)
    values = [f.evaluate(witness) for f in forms]
    rep.record("min_bound_at_witness", min(values) == bound,
               f"min={format_fraction(min(values))} claimed={format_fraction(bound)}")

    if data["cases"]:
        _recheck_cases(data, params, bound, rep)
    return rep


def _recheck_cases(data, params, bound, rep: RecheckReport):
    cell_cache = {}

    def cell(inst, idx):
        key = (inst, idx)
        if key not in cell_cache:
            cell_cache[key] = build_cell(data["cells"][inst + 1, idx], params.cs[inst], params)
        return cell_cache[key]

    lemma1 = lemma1_form(params)
    n_opt = n_bad = 0
    for case in data["cases"]:
        combo = [int(v) for v in case["cells"].split(",")]
        chosen = [cell(i, idx) for i, idx in enumerate(combo)]
        bounds = [lemma1] + [c.cell_function for c in chosen]
        lp: LinearProgram = case_program(bounds, merged_constraints(chosen), int(case["gov"]), params.K)
        status = Status(case["status"])
        mu = tuple(to_rational(v) for v in case["mu"].split(",")) if "mu" in case else None
        if status is Status.OPTIMAL:
            n_opt += 1
            w = [to_rational(v) for v in case["w"].split(",")]
            res = LPResult(status, to_rational(case["value"]), dict(zip(range(1, params.K + 1), w)), mu)
            good = res.value <= bound and (mu is None or verify_result(lp, res))
        else:
            good = mu is not None and verify_result(lp, LPResult(status, multipliers=mu))
        n_bad += not good
    rep.record("case_table", n_bad == 0, f"{len(data['cases'])} cases, {n_bad} failed")
    rep.record("case_counts", len(data["cases"]) == int(data["cases_examined"])
               and n_opt == int(data["feasible_cases"]))
