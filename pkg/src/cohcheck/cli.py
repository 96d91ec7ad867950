"""Command-line front end.

Exit codes: 0 success, 1 type or lemma error, 2 parse error, 3 usage error.
Reports go to standard output, human-readable diagnostics to standard error.
Without input paths every command runs on the shipped corpus.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from . import corpus
from .checker import CheckReport, Diagnostic, run_program
from .errors import CohError, LemmaFailure
from .glob import check_backend_agreement, check_semantic_lemmas, parse_model
from .mltt import DEFAULT as ELABORATOR
from .mltt import MCohRef, iterated_tower, show_m
from .parser import parse_program
from .syntax import CohDecl

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3
COMMANDS = ("check", "elaborate", "meta", "interp", "dump-corpus")
DEFAULT_MODEL = "discrete:2"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage().rstrip()}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--fail-fast", action="store_true", help="stop at the first error")
    common.add_argument("--model", help="model descriptor for interp, e.g. discrete:2")
    common.add_argument("--decl", help="only report on this declaration")

    p = _Parser(prog="cohcheck", description="Check coherence declarations for weak ∞-groupoids.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True
    helps = {
        "check": "parse and typecheck",
        "elaborate": "also print normal forms of the translation at the diagonal",
        "meta": "verify the diagonal lemmas for every coherence",
        "interp": "verify the semantic lemmas in a finite model",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("paths", nargs="*", help=".coh files or directories (default: shipped corpus)")
    dp = sub.add_parser("dump-corpus", parents=[common], help="write the shipped corpus to a directory")
    dp.add_argument("directory")
    return p


@dataclass
class CliConfig:
    command: str
    paths: list = field(default_factory=list)
    json: bool = False
    fail_fast: bool = False
    model: Optional[str] = None
    decl: Optional[str] = None
    directory: Optional[str] = None

    @classmethod
    def from_args(cls, argv) -> "CliConfig":
        ns = build_parser().parse_args(argv)
        cfg = cls(
            command=ns.command,
            paths=list(getattr(ns, "paths", []) or []),
            json=ns.json,
            fail_fast=ns.fail_fast,
            model=ns.model,
            decl=ns.decl,
            directory=getattr(ns, "directory", None),
        )
        if cfg.model is not None and cfg.command != "interp":
            raise UsageError("cohcheck: error: --model is only valid with interp")
        return cfg


@dataclass
class Source:
    name: str
    text: str


def collect_sources(paths: list) -> list:
    if not paths:
        return [Source(name, text) for name, text in corpus.load().items()]
    out = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files = sorted(f for f in p.iterdir() if f.suffix == ".coh" and f.is_file())
            if not files:
                raise UsageError(f"cohcheck: error: no .coh files in {raw}")
        elif p.is_file():
            files = [p]
        else:
            raise UsageError(f"cohcheck: error: no such file or directory: {raw}")
        for f in files:
            try:
                text = f.read_bytes().decode("utf-8", errors="replace")
            except OSError as e:
                raise UsageError(f"cohcheck: error: cannot read {f}: {e.strerror}") from None
            out.append(Source(str(f), text))
    return out


class _Style:
    def __init__(self, enabled: bool):
        self.enabled = enabled

    def paint(self, text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.enabled else text

    def status(self, ok: bool) -> str:
        return self.paint("ok", "32") if ok else self.paint("error", "31")


@dataclass
class FileResult:
    source: Source
    reports: list
    table: object = None
    parse_error: Optional[CohError] = None


class Runner:
    def __init__(self, cfg: CliConfig, out: TextIO, err: TextIO):
        self.cfg = cfg
        self.out = out
        self.err = err
        self.style = _Style(os.environ.get("COHCHECK_COLOR", "0") == "1")
        self.code = EXIT_OK

    def fail(self, code: int) -> None:
        self.code = max(self.code, code)

    # shared front half ------------------------------------------------------

    def check_all(self, sources: list) -> list:
        results = []
        for src in sources:
            try:
                program = parse_program(src.text, src.name)
            except CohError as e:
                results.append(FileResult(src, [], None, e))
                self.fail(EXIT_PARSE)
                if self.cfg.fail_fast:
                    break
                continue
            reports, table = run_program(program, self.cfg.fail_fast)
            results.append(FileResult(src, reports, table))
            if any(not r.ok for r in reports):
                self.fail(EXIT_ERROR)
                if self.cfg.fail_fast:
                    break
        if self.cfg.decl is not None and not any(
            r.decl == self.cfg.decl for fr in results for r in fr.reports
        ):
            raise UsageError(f"cohcheck: error: no declaration named {self.cfg.decl!r}")
        return results

    def selected(self, reports: list) -> list:
        if self.cfg.decl is None:
            return reports
        return [r for r in reports if r.decl == self.cfg.decl]

    def diagnose(self, d: Diagnostic) -> None:
        where = f"{d.span}: " if d.span is not None else ""
        self.err.write(f"{where}{self.style.paint('error', '31')}[{d.code}]: {d.message}\n")

    def parse_failure_report(self, fr: FileResult) -> CheckReport:
        e = fr.parse_error
        return CheckReport(None, False, diagnostics=(Diagnostic(e.code, e.describe(), e.span),))

    def emit_json(self, payload) -> None:
        self.out.write(json.dumps(payload, indent=2, sort_keys=False, ensure_ascii=False) + "\n")

    # commands ----------------------------------------------------------------

    def run(self) -> int:
        cmd = self.cfg.command
        if cmd == "dump-corpus":
            return self.dump_corpus()
        results = self.check_all(collect_sources(self.cfg.paths))
        getattr(self, "cmd_" + cmd.replace("-", "_"))(results)
        return self.code

    def cmd_check(self, results: list) -> None:
        payload = []
        for fr in results:
            if fr.parse_error is not None:
                rep = self.parse_failure_report(fr)
                payload.append(rep.to_json())
                if not self.cfg.json:
                    self.out.write(f"{fr.source.name}: {self.style.status(False)} [{rep.diagnostics[0].code}]\n")
                self.diagnose(rep.diagnostics[0])
                continue
            for r in self.selected(fr.reports):
                payload.append(r.to_json())
                if not self.cfg.json:
                    self.out.write(self.report_line(fr.source.name, r) + "\n")
                for d in r.diagnostics:
                    self.diagnose(d)
        if self.cfg.json:
            self.emit_json(payload)

    def report_line(self, name: str, r: CheckReport) -> str:
        if r.ok:
            return f"{name}: {r.decl}: {self.style.status(True)} (dim {r.dim}, depth {r.depth})"
        codes = ", ".join(d.code for d in r.diagnostics)
        return f"{name}: {r.decl}: {self.style.status(False)} [{codes}]"

    def _lemma_rows(self, results: list) -> list:
        """``(file, report, nf_ty, nf_tm, error)`` for each checked coherence."""
        rows = []
        for fr in results:
            if fr.parse_error is not None:
                rep = self.parse_failure_report(fr)
                if not self.cfg.json:
                    self.out.write(f"{fr.source.name}: {self.style.status(False)} [{rep.diagnostics[0].code}]\n")
                self.diagnose(rep.diagnostics[0])
                rows.append((fr.source.name, rep, None, None, None))
                continue
            for r in self.selected(fr.reports):
                if not r.ok:
                    if not self.cfg.json:
                        self.out.write(self.report_line(fr.source.name, r) + "\n")
                    for d in r.diagnostics:
                        self.diagnose(d)
                    rows.append((fr.source.name, r, None, None, None))
                    continue
                if not isinstance(r.entry, CohDecl):
                    continue
                e = r.entry
                err = None
                try:
                    ELABORATOR.check_diagonal_lemmas(e)
                except LemmaFailure as exc:
                    err = exc
                    self.fail(EXIT_ERROR)
                diag = ELABORATOR.diag(e.ctx)
                nf_ty = ELABORATOR.at_diag(e.ctx, ELABORATOR.elaborate_ty(e.ctx, e.ty).body)
                nf_tm = ELABORATOR.normalize(MCohRef(e.ctx, e.ty, diag, e.name))
                rows.append((fr.source.name, r, nf_ty, nf_tm, err))
                if err is not None and self.cfg.fail_fast:
                    return rows
        return rows

    def _lemma_json(self, rows: list) -> list:
        payload = []
        for _, r, _, _, err in rows:
            if err is None:
                payload.append(r.to_json())
            else:
                bad = CheckReport(r.decl, False, r.dim, r.depth, (Diagnostic(err.code, err.describe(), None),))
                payload.append(bad.to_json())
        return payload

    def cmd_elaborate(self, results: list) -> None:
        rows = self._lemma_rows(results)
        if self.cfg.json:
            self.emit_json(self._lemma_json(rows))
            return
        for name, r, nf_ty, nf_tm, err in rows:
            if nf_ty is None:
                continue
            self.out.write(f"{name}: {r.decl}: dim {r.dim}\n")
            self.out.write(f"  type at diagonal  {show_m(nf_ty)}\n")
            self.out.write(f"  term at diagonal  {show_m(nf_tm)}\n")
            if err is not None:
                self.err.write(f"{name}: {r.decl}: {err.describe()}\n")

    def cmd_meta(self, results: list) -> None:
        rows = self._lemma_rows(results)
        if self.cfg.json:
            self.emit_json(self._lemma_json(rows))
            return
        table = [("file", "decl", "dim", "normal form", "status")]
        for name, r, nf_ty, nf_tm, err in rows:
            if nf_tm is None:
                continue
            want = iterated_tower("a", r.dim)[1]
            status = "ok" if err is None else "FAIL"
            table.append((Path(name).name, r.decl, str(r.dim), show_m(nf_tm) if err else show_m(want), status))
            if err is not None:
                self.err.write(f"{name}: {r.decl}: {err.describe()}\n")
        widths = [max(len(row[i]) for row in table) for i in range(4)]
        for i, row in enumerate(table):
            cells = [c.ljust(w) for c, w in zip(row, widths)]
            status = row[4]
            if i > 0:
                status = self.style.paint(status, "32" if status == "ok" else "31")
            self.out.write("  ".join(cells + [status]) + "\n")

    def cmd_interp(self, results: list) -> None:
        descriptor = self.cfg.model or DEFAULT_MODEL
        try:
            model = parse_model(descriptor)
        except ValueError as e:
            raise UsageError(f"cohcheck: error: {e}") from None
        for fr in results:
            if fr.parse_error is not None:
                self.diagnose(self.parse_failure_report(fr).diagnostics[0])
            for r in fr.reports:
                for d in r.diagnostics:
                    self.diagnose(d)
        entries = [r.entry for fr in results for r in self.selected(fr.reports) if r.ok]
        status, message, report, agreement = "ok", None, None, 0
        try:
            report = check_semantic_lemmas(model, entries)
            agreement = check_backend_agreement(entries)
        except LemmaFailure as e:
            status, message = "error", e.describe()
            self.fail(EXIT_ERROR)
            self.err.write(f"{self.style.paint('error', '31')}[{e.code}]: {message}\n")
        if self.cfg.json:
            self.emit_json({
                "model": descriptor,
                "status": status,
                "contexts": report.contexts if report else None,
                "environments": report.environments if report else None,
                "checks": dict(sorted(report.checks.items())) if report else {},
                "agreement": agreement,
                "message": message,
            })
            return
        self.out.write(f"model {descriptor}: {self.style.status(status == 'ok')}\n")
        if report is not None:
            self.out.write(f"  contexts      {report.contexts}\n")
            self.out.write(f"  environments  {report.environments}\n")
            for lemma, n in sorted(report.checks.items()):
                self.out.write(f"  {lemma:<13} {n}\n")
            self.out.write(f"  {'agreement':<13} {agreement}\n")

    def dump_corpus(self) -> int:
        target = Path(self.cfg.directory)
        if target.exists() and not target.is_dir():
            raise UsageError(f"cohcheck: error: {target} exists and is not a directory")
        target.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in corpus.load().items():
            (target / name).write_text(text, encoding="utf-8")
            written.append(name)
        if self.cfg.json:
            self.emit_json({"directory": str(target), "files": written})
        else:
            for name in written:
                self.out.write(f"{target / name}\n")
        return EXIT_OK


def run(cfg: CliConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    try:
        return Runner(cfg, out, err).run()
    except UsageError as e:
        err.write(f"{e}\n")
        return EXIT_USAGE


def main(argv=None, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    err_stream = err if err is not None else sys.stderr
    try:
        cfg = CliConfig.from_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        err_stream.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    return run(cfg, out, err)
