"""Command-line front end: a thin client over the service handlers.

Each subcommand loads a YAML config, validates it into the same pydantic
request model the HTTP service accepts, and dispatches either in-process
(default) or to a running server via ``--server URL``.  Outputs are CSV and
plain-text report files with full-precision (17 significant digit) numbers.

Exit codes: 0 success / all checks passed; 2 an estimate check failed (the
witness is printed); 1 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import yaml
from pydantic import ValidationError

from . import service
from .errors import ImpulseCertError

SUBCOMMANDS = ("simulate", "norms", "bound", "gains", "certify", "probe", "suite")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: str, schema: str, header: list, rows: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema: {schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise SystemExit(_usage_error(f"config file not found: {path}"))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise SystemExit(_usage_error(f"malformed config{where}: {exc}"))
    if not isinstance(data, dict):
        raise SystemExit(_usage_error("config root must be a mapping"))
    return data


def _usage_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _validation_error(exc: ValidationError) -> int:
    print("error: invalid config:", file=sys.stderr)
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"])
        print(f"  field {loc}: {err['msg']}", file=sys.stderr)
    return 1


class _Dispatcher:
    """In-process or remote dispatch of a request model."""

    def __init__(self, server: Optional[str]):
        self.server = server.rstrip("/") if server else None

    def call(self, endpoint: str, handler, req, response_model):
        if self.server is None:
            return handler(req)
        import httpx

        resp = httpx.post(f"{self.server}/{endpoint}",
                          json=req.model_dump(mode="json"), timeout=600.0)
        if resp.status_code != 200:
            raise ImpulseCertError(f"server error {resp.status_code}: {resp.text}")
        return response_model.model_validate(resp.json())


def _pop_output(cfg: dict) -> dict:
    return cfg.pop("output", {}) or {}


def cmd_simulate(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.SimulateRequest.model_validate(cfg)
    resp = disp.call("simulate", service.handle_simulate, req,
                     service.SimulateResponse)
    path = out or output.get("path", "trajectory.csv")
    n = len(resp.columns) - 2
    header = [*resp.columns, *(f"left_x{i+1}" for i in range(n))]
    left_by_time = {j.time: j.left for j in resp.jumps}
    rows = []
    for row in resp.rows:
        t, jump_flag = row[0], row[-1]
        left = left_by_time.get(t) if jump_flag else None
        rows.append([*row, *(left if left else [""] * n)])
    _write_csv(path, service.TRAJECTORY_SCHEMA, header, rows)
    if resp.blown_up:
        print(f"finite escape at t = {_fmt(resp.escape_time)}; trajectory "
              f"truncated (written to {path})")
    else:
        print(f"trajectory written to {path} ({len(rows)} rows, "
              f"{len(resp.jumps)} jumps)")
    return 0


def cmd_norms(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.NormsRequest.model_validate(cfg)
    resp = disp.call("norms", service.handle_norms, req, service.NormsResponse)
    rows = [["sup", resp.sup]]
    if resp.energy is not None:
        rows.append(["energy", resp.energy])
    if resp.truncated_sup is not None:
        rows.append(["truncated_sup", resp.truncated_sup])
    if resp.exceedance_measure is not None:
        rows.append(["exceedance_measure", resp.exceedance_measure])
        rows.append(["exceedance_count", resp.exceedance_count])
    path = out or output.get("path")
    if path:
        _write_csv(path, "impulsecert/norms/1", ["quantity", "value"], rows)
    for name, val in rows:
        print(f"{name} = {_fmt(val)}")
    return 0


def cmd_bound(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.BoundRequest.model_validate(cfg)
    resp = disp.call("bound", service.handle_bound, req, service.BoundResponse)
    path = out or output.get("path", "bound.csv")
    _write_csv(path, service.BOUND_SCHEMA, ["t", "h"], resp.rows)
    print(f"bound written to {path} ({len(resp.rows)} rows)")
    return 0


def cmd_gains(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.GainsRequest.model_validate(cfg)
    resp = disp.call("gains", service.handle_gains, req, service.GainsResponse)
    path = out or output.get("path", "gains.yaml")
    doc = {
        "alpha": resp.alpha.model_dump(exclude_defaults=True),
        "chi1": resp.chi1.model_dump(exclude_defaults=True),
        "chi2": resp.chi2.model_dump(exclude_defaults=True),
        "kappa": resp.kappa.model_dump(exclude_defaults=True),
        "alpha_estimate": resp.alpha_estimate.model_dump(exclude_defaults=True),
        "offset": resp.offset,
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
    report_path = output.get("report")
    if report_path:
        Path(report_path).write_text(resp.report + "\n", encoding="utf-8")
    print(resp.report)
    print(f"gain descriptors written to {path}")
    return 0


def cmd_certify(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.CertifyRequest.model_validate(cfg)
    resp = disp.call("certify", service.handle_certify, req,
                     service.CertifyResponse)
    rows = []
    for s in resp.stages:
        w = s.witness
        rows.append(["stage:" + s.name, "pass" if s.passed else "FAIL",
                     s.worst_margin,
                     w.family_index if w else "", w.scenario_index if w else "",
                     w.input_label if w else "", w.t if w else "",
                     w.lhs if w else "", w.rhs if w else ""])
    for li, si, label, margin in resp.scenario_margins:
        rows.append(["scenario", "pass" if margin >= -1e-7 else "FAIL",
                     margin, li, si, label, "", "", ""])
    path = out or output.get("path")
    if path:
        _write_csv(path, service.MARGIN_SCHEMA,
                   ["row", "verdict", "worst_margin", "family_index",
                    "scenario_index", "input_label", "t", "observed", "bound"],
                   rows)
    for s in resp.stages:
        status = "pass" if s.passed else "FAIL"
        print(f"[{status}] {s.name}: worst margin {_fmt(s.worst_margin)}"
              + (f" ({s.detail})" if s.detail else ""))
        if not s.passed and s.witness:
            w = s.witness
            print(f"  witness: family {w.family_index}, scenario "
                  f"{w.scenario_index} ({w.input_label}), t = {_fmt(w.t)}, "
                  f"observed {_fmt(w.lhs)} > bound {_fmt(w.rhs)}")
    print(f"checks evaluated: {resp.checks}")
    print(resp.note)
    return 0 if resp.passed else 2


def cmd_probe(cfg: dict, out: Optional[str], disp: _Dispatcher) -> int:
    output = _pop_output(cfg)
    req = service.ProbeRequest.model_validate(cfg)
    resp = disp.call("probe", service.handle_probe, req, service.ProbeResponse)
    rows = [["delta", d["eps"], d["delta"] if d["delta"] is not None else "",
             "", d["status"]] for d in resp.deltas]
    rows += [["attractivity", a["eps"], a["r"],
              a["T"] if a["T"] is not None else "", a["status"]]
             for a in resp.attractivity]
    path = out or output.get("path")
    if path:
        _write_csv(path, "impulsecert/probe/1",
                   ["probe", "eps", "delta_or_r", "T", "status"], rows)
    for d in resp.deltas:
        print(f"eps = {_fmt(d['eps'])}: delta = "
              f"{_fmt(d['delta']) if d['delta'] is not None else 'not found'} "
              f"({d['status']})")
    for a in resp.attractivity:
        t_txt = _fmt(a["T"]) if a["T"] is not None else "none"
        print(f"r = {_fmt(a['r'])}, eps = {_fmt(a['eps'])}: T = {t_txt} "
              f"({a['status']})")
    print(f"simulations used: {resp.sims_used} (budget {resp.budget})")
    print(resp.note)
    inconclusive = any(d["status"] != "found" for d in resp.deltas)
    return 2 if inconclusive else 0


def cmd_suite(args, disp: _Dispatcher) -> int:
    req = service.SuiteRequest(only=args.only, seed=args.seed)
    resp = disp.call("suite", service.handle_suite, req, service.SuiteResponse)
    for r in resp.rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:28s} ({r.seconds:5.1f}s)  {r.detail}")
    print(f"{'ALL PASS' if resp.all_passed else 'FAILURES PRESENT'} "
          f"({len(resp.rows)} criteria, {resp.seconds:.1f}s)")
    if args.out:
        _write_csv(args.out, "impulsecert/suite/1",
                   ["criterion", "verdict", "seconds", "detail"],
                   [[r.name, "pass" if r.passed else "FAIL", r.seconds,
                     r.detail] for r in resp.rows])
    return 0 if resp.all_passed else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impulsecert",
        description="simulate impulsive systems and check stability estimates")
    parser.add_argument("--server", default=None,
                        help="dispatch to a running service at this URL "
                             "instead of in-process")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "norms", "bound", "gains", "certify", "probe"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", default=None, help="output file path")
    p = sub.add_parser("suite")
    p.add_argument("--only", default=None,
                   help="run only criteria whose name contains this substring")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the table as CSV here")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    disp = _Dispatcher(args.server)
    try:
        if args.command == "suite":
            return cmd_suite(args, disp)
        cfg = _load_config(args.config)
        handler = {"simulate": cmd_simulate, "norms": cmd_norms,
                   "bound": cmd_bound, "gains": cmd_gains,
                   "certify": cmd_certify, "probe": cmd_probe}[args.command]
        return handler(cfg, args.out, disp)
    except ValidationError as exc:
        return _validation_error(exc)
    except ImpulseCertError as exc:
        return _usage_error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
