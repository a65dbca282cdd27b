"""Command line: run rules, convert encodings, verify rules, reductions and
the constructor, enumerate graphs and tables.

Exit codes: 0 success, 1 parse or input error, 2 invalid rule, 3 step fault,
4 a verification found a counterexample.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

import tomli

from . import arith, builders, constructor, encodings, hereditary, reductions, rules
from .errors import (BudgetExceeded, CGDError, InvalidRule, MissingDiskEntry, ParseError, SemanticError,
                     UnknownBuiltin)
from .graph import CayleyGraph, iso_eq

DEFAULT_SEED = 1
EXIT_PARSE, EXIT_RULE, EXIT_FAULT, EXIT_VERIFY = 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# Sources


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {path}: {exc.strerror}") from None


def _labels_of(x: CayleyGraph) -> list:
    return sorted({str(s) for s in x.vlabels if s is not None})


def _elabels_of(x: CayleyGraph) -> list:
    return sorted({str(s) for _, s in x.elabels})


def load_graph(spec, ports=2, vlabels=()):
    """A graph from a file, ``index:N`` or a builtin spec; returns ``(graph, meta)``."""
    try:
        if os.path.exists(spec) or spec == "-":
            x, meta = encodings.read_graph(_read_text(spec))
            return x, meta
        if spec.startswith("index:"):
            x = arith.unrank_graph(int(spec[6:]), ports, vlabels)
            return x, {"port_names": None, "vlabels": list(vlabels), "elabels": []}
        x = builders.parse_graph_spec(spec)
    except (ParseError, SemanticError) as exc:
        raise CliError(EXIT_PARSE, f"{spec}: {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    return x, {"port_names": None, "vlabels": _labels_of(x), "elabels": _elabels_of(x)}


def load_rule(args, x=None, meta=None):
    """Resolve ``--rule``/``--rule-file``/``--rule-index``/``--ca``."""
    if getattr(args, "rule_file", None):
        try:
            return encodings.rule_decode(_read_text(args.rule_file))
        except InvalidRule as exc:
            raise CliError(EXIT_RULE, f"{args.rule_file}: {exc}") from None
        except (ParseError, SemanticError) as exc:
            raise CliError(EXIT_PARSE, f"{args.rule_file}: {exc}") from None
    if getattr(args, "ca", None) is not None:
        return hereditary.ca_to_cgd(_ca(args.ca))
    if getattr(args, "rule_index", None) is not None:
        sig = _signature(args.signature)
        return arith.unrank_rule(args.rule_index, sig)
    name = args.rule
    if name is None:
        raise CliError(EXIT_PARSE, "no rule given")
    if name.startswith("ca:"):
        return hereditary.ca_to_cgd(_ca(name[3:]))
    ports = x.ports if x is not None else 1
    vl = tuple(meta["vlabels"]) if meta else ()
    el = tuple(meta["elabels"]) if meta else ()
    try:
        if name == "identity":
            return rules.identity_rule(ports, vl, el, tabulate=x is None)
        return rules.builtin(name, ports, vl, el)
    except UnknownBuiltin as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def _ca(code):
    try:
        return hereditary.CARule.wolfram(int(code))
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad Wolfram code {code!r}: {exc}") from None


def _signature(text):
    """``ports,radius,bound[,class[,vlabels]]`` with labels separated by ``/``."""
    if not text:
        raise CliError(EXIT_PARSE, "--rule-index needs --signature")
    parts = text.split(",")
    try:
        ports, radius, bound = (int(p) for p in parts[:3])
    except ValueError:
        raise CliError(EXIT_PARSE, f"bad signature {text!r}") from None
    cls = parts[3] if len(parts) > 3 else "any"
    vl = tuple(parts[4].split("/")) if len(parts) > 4 and parts[4] else ()
    return arith.RuleSignature(ports, vl, (), radius, bound, cls)


# ---------------------------------------------------------------------------
# Output


def to_dot(x: CayleyGraph, name="cgd") -> str:
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    for v in range(x.n):
        label = "" if x.vlabels[v] is None else str(x.vlabels[v])
        style = ", style=bold, penwidth=3" if v == 0 else ""
        lines.append(f'  v{v} [label="{label}"{style}];')
    for (u, p), (v, q) in x.edges():
        lab = x.elabel(u, p)
        extra = "" if lab is None else f', label="{lab}"'
        lines.append(f'  v{u} -- v{v} [taillabel="{p}", headlabel="{q}"{extra}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _graph_file(x, meta):
    vl = sorted(set(meta.get("vlabels") or []) | set(_labels_of(x)))
    el = sorted(set(meta.get("elabels") or []) | set(_elabels_of(x)))
    return encodings.write_graph(x, vl, el, meta.get("port_names"))


# ---------------------------------------------------------------------------
# Commands


def cmd_run(args, out):
    x, meta = load_graph(args.graph, args.ports)
    f = load_rule(args, x, meta)
    traj = [x]
    for t in range(args.steps):
        try:
            x = rules.apply_step(f, x)
        except (CGDError, MissingDiskEntry) as exc:
            raise CliError(EXIT_FAULT, f"step {t + 1}: {exc}") from None
        traj.append(x)
    if args.format == "trace":
        for t, g in enumerate(traj):
            out.write(f"t={t} n={g.n} {encodings.string_encode(g, meta.get('port_names'))}\n")
    elif args.format == "dot":
        out.write(to_dot(traj[-1]))
    else:
        out.write(_graph_file(traj[-1], meta))
    return 0


def cmd_convert(args, out):
    op = args.op
    if op == "to-string":
        x, meta = load_graph(args.source)
        out.write(encodings.string_encode(x, meta.get("port_names")) + "\n")
    elif op == "from-string":
        names = args.port_names.split(",") if args.port_names else None
        labels = args.vlabels.split(",") if args.vlabels else None
        ports = len(names) if names else args.ports
        try:
            x = encodings.string_decode(args.source.strip(), ports, names, labels)
        except (ParseError, SemanticError) as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
        out.write(_graph_file(x, {"port_names": names, "vlabels": labels or []}))
    elif op == "to-ring":
        x, _ = load_graph(args.source)
        y = encodings.ring_encode(x)
        out.write(_graph_file(y, {}))
    elif op == "from-ring":
        y, _ = load_graph(args.source)
        try:
            x = encodings.ring_decode(y, args.ports)
        except CGDError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
        out.write(_graph_file(x, {}))
    elif op == "rank":
        x, meta = load_graph(args.source)
        vl = args.vlabels.split(",") if args.vlabels else meta.get("vlabels") or ()
        try:
            out.write(f"{arith.rank_graph(x, vl, meta.get('elabels') or ())}\n")
        except ValueError as exc:
            raise CliError(EXIT_PARSE, str(exc)) from None
    elif op == "unrank":
        vl = args.vlabels.split(",") if args.vlabels else ()
        try:
            n = int(args.source)
        except ValueError:
            raise CliError(EXIT_PARSE, f"not an index: {args.source!r}") from None
        x = arith.unrank_graph(n, args.ports, vl)
        out.write(_graph_file(x, {"vlabels": [s for s in vl if s != encodings.BLANK]}))
    return 0


def cmd_verify(args, out):
    if args.what == "rule":
        if args.builtin:
            args.rule = args.builtin
        f = load_rule(args)
        samples = None
        if f.table is None:
            rng = random.Random(args.seed)
            samples = [builders.random_graph(rng, f.ports, rng.randint(1, 6), f.vlabels, f.elabels)
                       for _ in range(args.samples)]
        report = rules.validate_rule(f, samples=samples)
        out.write(f"rule {f.name}: mode {report.mode}\n")
        for line in report.lines():
            out.write(line + "\n")
        if not report.ok:
            raise CliError(EXIT_RULE, f"rule {f.name} is not a valid local rule")
        return 0
    if args.what == "sim":
        return _verify_manifest(args, out)
    return _verify_construct(args, out)


REDUCTIONS = {"radius_one": reductions.radius_one_reduction,
              "label_free": reductions.label_free_reduction,
              "normal_form": reductions.normal_form}


def _manifest_rule(name):
    if name.startswith("rotate"):
        return reductions.rotate_rule(steps=int(name[6:] or 2))
    if name.startswith("ca:"):
        return hereditary.ca_to_cgd(_ca(name[3:]))
    try:
        return rules.builtin(name)
    except UnknownBuiltin as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None


def _verify_manifest(args, out):
    """Manifest: ``[[case]]`` tables with ``rule``, ``reduction``, ``steps``,
    ``ports`` and ``graphs`` (string encodings)."""
    try:
        data = tomli.loads(_read_text(args.manifest))
    except tomli.TOMLDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{args.manifest}: {exc}") from None
    cases = data.get("case", [])
    if not cases:
        raise CliError(EXIT_PARSE, f"{args.manifest}: no [[case]] entries")
    for i, case in enumerate(cases):
        try:
            f = _manifest_rule(case["rule"])
            red = REDUCTIONS[case.get("reduction", "normal_form")]
            ports = case.get("ports", f.ports)
            xs = [encodings.string_decode(s, ports, None, list(f.vlabels) or None)
                  for s in case["graphs"]]
        except KeyError as exc:
            raise CliError(EXIT_PARSE, f"case {i}: missing or unknown {exc}") from None
        except (ParseError, SemanticError) as exc:
            raise CliError(EXIT_PARSE, f"case {i}: {exc}") from None
        result = red(f)
        verdict = reductions.verify_simulation(result.rule, f, result.map, xs, case.get("steps", 2))
        title = case.get("name", f"{case['rule']}/{case.get('reduction', 'normal_form')}")
        out.write(f"{title}: delta={result.map.delta} ports={result.rule.ports} "
                  f"{verdict.describe()}\n")
        if not verdict.passed:
            raise CliError(EXIT_VERIFY, f"{title}: {verdict.describe()}")
    return 0


def _construct(args, out, trace):
    x, meta = load_graph(args.graph)
    f = load_rule(args)
    names = meta.get("port_names")
    try:
        config = constructor.assemble(encodings.string_encode(x, names),
                                      encodings.rule_encode(f), x.ports, names)
    except (ParseError, SemanticError) as exc:
        raise CliError(EXIT_PARSE, str(exc)) from None
    emit = (lambda line: out.write(line + "\n")) if trace else None
    outcome = constructor.run_machine(config, args.max_steps, emit)
    out.write(f"status: {outcome.status} steps: {outcome.steps}\n")
    if outcome.status != "Done":
        raise CliError(EXIT_FAULT, f"machine {outcome.status}: {outcome.reason or 'step limit'}")
    return x, f, outcome


def _verify_construct(args, out):
    x, f, outcome = _construct(args, out, trace=False)
    built = constructor.extract(outcome, strip=True)
    same = iso_eq(built, x)
    site = constructor.extract(outcome)
    text = encodings.rule_encode(f)
    loads = constructor.payloads(site)
    good = sum(1 for p in loads if p == text)
    out.write(f"iso: {'true' if same else 'false'}\n")
    out.write(f"payloads: {good}/{len(loads)}\n")
    if not same or good != len(loads):
        raise CliError(EXIT_VERIFY, "constructed graph differs from the input")
    return 0


def cmd_construct(args, out):
    _, _, outcome = _construct(args, out, trace=args.trace)
    out.write(_graph_file(constructor.extract(outcome, strip=True), {}))
    return 0


def cmd_enum(args, out):
    if args.what == "graphs":
        vl = args.vlabels.split(",") if args.vlabels else ()
        for i in range(args.start, args.start + args.count):
            out.write(f"{i} {encodings.string_encode(arith.unrank_graph(i, args.ports, vl))}\n")
    elif args.what == "disks":
        vl = args.vlabels.split(",") if args.vlabels else ()
        disks = rules.enumerate_disks(args.ports, vl, (), args.radius, args.graph_class)
        for d in disks:
            out.write(encodings.string_encode(d) + "\n")
        out.write(f"count: {len(disks)}\n")
    elif args.what == "rule-rank":
        f = load_rule(args)
        if f.table is None:
            raise CliError(EXIT_RULE, f"rule {f.name} has no finite table")
        out.write(f"{arith.rank_rule(f)}\n")
    elif args.what == "rule-unrank":
        f = arith.unrank_rule(args.index, _signature(args.signature))
        out.write(encodings.rule_encode(f))
    elif args.what == "rule-count":
        out.write(f"{arith.rule_count(_signature(args.signature))}\n")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _rule_flags(p, required=False):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--rule", help="builtin rule name or ca:<wolfram code>")
    g.add_argument("--rule-file", help="rule file in the cgd-rule format")
    g.add_argument("--rule-index", type=int, help="rule table index (needs --signature)")
    g.add_argument("--ca", type=int, help="elementary cellular automaton by Wolfram code")
    p.add_argument("--signature", help="ports,radius,bound[,class[,labels]] for --rule-index")


def build_parser():
    ap = argparse.ArgumentParser(prog="cgd", description="Causal graph dynamics toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="iterate a rule on a graph")
    _rule_flags(p, required=True)
    p.add_argument("--graph", required=True, help="graph file, index:N or builtin spec")
    p.add_argument("--ports", type=int, default=2, help="ports for index:N graphs")
    p.add_argument("--steps", type=int, default=1)
    p.add_argument("--format", choices=("graph", "dot", "trace"), default="graph")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convert", help="graph encodings and numbering")
    p.add_argument("op", choices=("to-string", "from-string", "to-ring", "from-ring",
                                  "rank", "unrank"))
    p.add_argument("source", help="graph file, string or index")
    p.add_argument("--ports", type=int, default=2)
    p.add_argument("--port-names")
    p.add_argument("--vlabels")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("verify", help="check rules, reductions and the constructor")
    vsub = p.add_subparsers(dest="what", required=True)
    q = vsub.add_parser("rule")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--builtin", dest="builtin")
    g.add_argument("--file", dest="rule_file")
    g.add_argument("--ca", type=int)
    q.add_argument("--samples", type=int, default=200)
    q.add_argument("--seed", type=int, default=DEFAULT_SEED)
    q.set_defaults(func=cmd_verify, rule=None, rule_index=None, signature=None)
    q = vsub.add_parser("sim")
    q.add_argument("--manifest", required=True)
    q.set_defaults(func=cmd_verify)
    q = vsub.add_parser("construct")
    q.add_argument("--graph", required=True)
    _rule_flags(q, required=True)
    q.add_argument("--max-steps", type=int, default=100000)
    q.set_defaults(func=cmd_verify)

    p = sub.add_parser("construct", help="run the constructor machine")
    p.add_argument("--graph", required=True)
    _rule_flags(p, required=True)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--max-steps", type=int, default=100000)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("enum", help="enumerate graphs, disks and rule tables")
    esub = p.add_subparsers(dest="what", required=True)
    q = esub.add_parser("graphs")
    q.add_argument("--ports", type=int, default=2)
    q.add_argument("--vlabels")
    q.add_argument("--start", type=int, default=0)
    q.add_argument("--count", type=int, default=10)
    q = esub.add_parser("disks")
    q.add_argument("--ports", type=int, default=2)
    q.add_argument("--vlabels")
    q.add_argument("--radius", type=int, default=0)
    q.add_argument("--class", dest="graph_class", choices=rules.GRAPH_CLASSES, default="any")
    q = esub.add_parser("rule-rank")
    _rule_flags(q, required=True)
    q = esub.add_parser("rule-unrank")
    q.add_argument("index", type=int)
    q.add_argument("--signature", required=True)
    q = esub.add_parser("rule-count")
    q.add_argument("--signature", required=True)
    p.set_defaults(func=cmd_enum)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"cgd: {exc}", file=sys.stderr)
        return exc.code
    except InvalidRule as exc:
        print(f"cgd: {exc}", file=sys.stderr)
        return EXIT_RULE
    except (ParseError, SemanticError, BudgetExceeded) as exc:
        print(f"cgd: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CGDError as exc:
        print(f"cgd: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
