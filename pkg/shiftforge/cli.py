"""Command-line surface: argument parsing, input loading and report emission.

Exit codes: 0 on success, 2 when a precondition refuses (including usage
errors), 1 on anything unexpected. Reports go to stdout or --out; progress
lines go to the log.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from shiftforge import params, pool
from shiftforge.combing.chain import FIELDNAMES, run_chain
from shiftforge.combing.config import CombingConfig
from shiftforge.combing.dense import project_chain, relative_dense_family
from shiftforge.core.group import FiniteSet, origin
from shiftforge.core.patterns import Pattern
from shiftforge.core.sft import SftSpec, handle_from_json, sft_from_json
from shiftforge.core.local import default_margin
from shiftforge.core.shifts import enumerate_patterns, entropy_estimate, entropy_exact_1d, tier
from shiftforge.counterexample.periodize import lifted_window, periodize_and_refute
from shiftforge.counterexample.words import WordSystem
from shiftforge.errors import RefusalError, SpecFormatError
from shiftforge.report import Report
from shiftforge.sofic.cover import (build_cover, cover_matches_relabelling, cover_surjective_on,
                                    typing_violations)
from shiftforge.sofic.dense import entropy_target_nest, sofic_dense_family
from shiftforge.sofic.gaps import estimate_max_gap, product_gap_report
from shiftforge.sofic.presentation import SoficPresentation, presentation_violations
from shiftforge.tiling.periodic import PeriodicTiling, approximation_bounds, encode_tiling
from shiftforge.tiling.shapes import (ShapeSystem, check_rule_R1, convert_encoding,
                                      encoding_symbols, torus_r1_labellings, torus_tilings)
from shiftforge.utils import byte_offset, canonical_json

log = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_REFUSED = 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict

    @classmethod
    def from_args(cls, args):
        opts = {k: v for k, v in sorted(vars(args).items()) if k not in ('func', 'command', 'action')}
        action = getattr(args, 'action', None)
        return cls(args.command if action is None else f"{args.command} {action}", opts)

    def to_json(self):
        return {'command': self.command, **self.options}


# ============================================================================ #
# Inputs
# ============================================================================ #


def resolve_input(path):
    """`path` as given, else the file of that name shipped in shiftforge/data."""
    if os.path.exists(path):
        return path
    bundled = os.path.join(DATA_DIR, path)
    if os.path.exists(bundled):
        return bundled
    raise RefusalError(f"input file {path} not found")


def load_json(path):
    path = resolve_input(path)
    with open(path, 'rb') as fh:
        raw = fh.read()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as exc:
        raise SpecFormatError("input is not UTF-8", path, exc.start) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(exc.msg, path, byte_offset(text, exc.pos)) from None


def box_window(n, d) -> FiniteSet:
    if n is None or n < 1:
        raise RefusalError("--window must be a positive side length")
    return FiniteSet.box(origin(d), (n,) * d)


def _tiling(args) -> PeriodicTiling:
    if getattr(args, 'tiling', None):
        return PeriodicTiling.from_json(load_json(args.tiling))
    return PeriodicTiling.box(args.box, args.dim)


def _system(args) -> ShapeSystem:
    if getattr(args, 'shapes', None):
        return ShapeSystem.from_json(load_json(args.shapes))
    return _tiling(args).system


def _presentation(args) -> SoficPresentation:
    if args.presentation:
        return SoficPresentation.from_json(load_json(args.presentation))
    return SoficPresentation.even_shift()


def _margin(args, dim):
    return None if dim == 1 else args.margin


# ============================================================================ #
# count / entropy
# ============================================================================ #


def cmd_count(args, config):
    X = handle_from_json(load_json(args.sft))
    F = box_window(args.window, X.dim)
    result, patterns = enumerate_patterns(X, F, _margin(args, X.dim), want_list=bool(args.emit),
                                          cap=params.PATTERN_CAP)
    if args.emit:
        with open(args.emit, 'w', encoding='utf-8') as fh:
            fh.write(canonical_json({'window': F.to_json(),
                                     'patterns': [list(p.labels) for p in patterns]}))
    out = {'window_side': args.window, 'window_size': len(F), **result.to_json()}
    log.info("[count] |P(F, X)| = %s on %d sites", result.count, len(F))
    return Report(config.command, config.to_json(), result.mode, out)


def cmd_entropy(args, config):
    X = handle_from_json(load_json(args.sft))
    F = box_window(args.window, X.dim)
    est = entropy_estimate(X, F, _margin(args, X.dim))
    out = {'window_side': args.window, 'window_size': len(F), **est.to_json()}
    if X.dim == 1:
        exact = entropy_exact_1d(X)
        out['exact_entropy'] = exact.value
        out['excess'] = est.value - exact.value
    return Report(config.command, config.to_json(), est.mode, out)


# ============================================================================ #
# tiling
# ============================================================================ #


def cmd_tiling_encode(args, config):
    T = _tiling(args)
    F = box_window(args.window, T.dim)
    p = encode_tiling(T, F)
    centers, target = convert_encoding(p, T.system)
    if args.emit:
        with open(args.emit, 'w', encoding='utf-8') as fh:
            fh.write(canonical_json(p.to_json()))
    out = {'pattern': p.to_json(), 'symbols': list(encoding_symbols(T.system).symbols),
           'centers': centers.to_json(), 'center_symbols': list(target.symbols)}
    return Report(config.command, config.to_json(), None, out)


def cmd_tiling_verify(args, config):
    system = _system(args)
    if args.torus:
        r1 = torus_r1_labellings(system, args.torus)
        covers = torus_tilings(system, args.torus)
        out = {'torus': args.torus, 'r1_labellings': len(r1), 'exact_covers': len(covers),
               'equal': r1 == covers}
    elif args.pattern:
        p = Pattern.from_json(load_json(args.pattern), system.dim)
        violations = check_rule_R1(p, system)
        out = {'violations': violations, 'valid': not violations}
    else:
        raise RefusalError("tiling verify needs --torus N or --pattern PATH")
    return Report(config.command, config.to_json(), None, out)


def cmd_tiling_approx(args, config):
    T = _tiling(args)
    F = box_window(args.window, T.dim).translate(tuple(args.offset or (0,) * T.dim))
    bounds = approximation_bounds(T, F)
    out = bounds.to_json()
    if args.eps is not None:
        try:
            eps = Fraction(args.eps)
        except (ValueError, ZeroDivisionError):
            raise RefusalError(f"--eps {args.eps!r} is not a rational number") from None
        out['eps'] = args.eps
        out['holds'] = bounds.holds(eps)
    return Report(config.command, config.to_json(), None, out)


# ============================================================================ #
# comb
# ============================================================================ #


def _combing_config(X, args, L=None, eps=None):
    return CombingConfig.derive(X, args.eps if eps is None else eps, args.L if L is None else L,
                                args.window, margin=args.margin, delta=args.delta,
                                max_steps=args.max_steps, strict=args.strict,
                                decomposition_samples=args.samples)


def cmd_comb(args, config):
    X = sft_from_json(load_json(args.sft))
    cfg = _combing_config(X, args)
    chain = run_chain(X, cfg, decompose=not args.no_decompose)
    out = chain.to_json()
    if args.project:
        out['projections'] = [p.to_json() for p in project_chain(chain)]
    if args.target:
        Y = handle_from_json(load_json(args.sub)) if args.sub else SftSpec.empty(X.alphabet, X.dim)
        out['dense'] = relative_dense_family(X, Y, args.target, cfg, chain).to_json()
    report = Report(config.command, config.to_json(), chain.mode, out, list(chain.warnings))
    report.add_table('steps', FIELDNAMES, [s.csv_row() for s in chain.steps])
    return report


# ============================================================================ #
# cover
# ============================================================================ #


def _cover_setup(args):
    W = _presentation(args)
    cover_cfg = _combing_config(W.cover, args)
    C = build_cover(W, cover_cfg)
    return W, cover_cfg, C


def _chain_config(C, args):
    return _combing_config(C.sft, args, L=args.chain_L or args.L + 2,
                           eps=args.chain_eps or args.eps)


def cmd_cover_build(args, config):
    W, cfg, C = _cover_setup(args)
    F = box_window(args.window, W.dim)
    margin = _margin(args, W.dim)
    out = C.to_json()
    out['checks'] = {
        'matches_relabelling': cover_matches_relabelling(C, F, margin),
        'surjective': cover_surjective_on(C, F, margin),
        'typing_violations': len(typing_violations(C, F, margin, params.PATTERN_CAP)),
    }
    if args.emit:
        with open(args.emit, 'w', encoding='utf-8') as fh:
            fh.write(canonical_json(C.as_presentation().to_json()))
    mode = tier(W.dim, default_margin(C.sft) if margin is None else margin)
    return Report(config.command, config.to_json(), mode, out, list(cfg.warnings))


def cmd_cover_gap(args, config):
    W, cfg, C = _cover_setup(args)
    F = box_window(args.window, W.dim)
    gap = estimate_max_gap(C, args.samples, F, args.seed, args.margin, workers=args.threads)
    out = gap.to_json()
    warnings = list(cfg.warnings) + gap.warnings
    if args.control:
        X = sft_from_json(load_json(args.control[0]))
        T = sft_from_json(load_json(args.control[1]))
        control = product_gap_report(X, T, box_window(args.window, X.dim), args.samples,
                                     args.seed, args.margin, workers=args.threads)
        out['control'] = control.to_json()
        warnings += control.warnings
    report = Report(config.command, config.to_json(), None, out, warnings)
    report.add_table('samples', ['label', 'entropy', 'image_entropy', 'gap', 'exact_gap', 'empty'],
                     gap.samples)
    return report


def cmd_cover_dense(args, config):
    W, cfg, C = _cover_setup(args)
    chain_cfg = _chain_config(C, args)
    V = handle_from_json(load_json(args.sub)) if args.sub else None
    res = sofic_dense_family(W, V, args.target, cfg, chain_cfg, C=C)
    if args.emit:
        with open(args.emit, 'w', encoding='utf-8') as fh:
            fh.write(canonical_json(res.presentation.to_json()))
    return Report(config.command, config.to_json(), res.chain.mode, res.to_json(),
                  list(cfg.warnings) + list(res.chain.warnings))


def cmd_cover_nest(args, config):
    W, cfg, C = _cover_setup(args)
    chain_cfg = _chain_config(C, args)
    nest = entropy_target_nest(W, args.r, args.budget, args.schedule, cfg, chain_cfg, C=C)
    report = Report(config.command, config.to_json(), None, nest.to_json(),
                    list(cfg.warnings) + nest.warnings)
    report.add_table('entries', ['index', 'entropy', 'eps', 'step', 'reused'],
                     nest.entries)
    return report


# ============================================================================ #
# cx
# ============================================================================ #


def cmd_cx_freq(args, config):
    words = WordSystem()
    rows = words.frequency_table(args.levels)
    out = {'delta': str(words.delta), 'levels': rows,
           'witness': words.witness_densities(args.levels)}
    report = Report(config.command, config.to_json(), None, out)
    report.add_table('levels', ['level', 'T', 'L', 'ones', 'frequency', 'above_bound'],
                     [{**r, 'frequency': f"{r['frequency']['num']}/{r['frequency']['den']}"}
                      for r in rows])
    return report


def cmd_cx_find(args, config):
    words = WordSystem()
    radius = args.radius if args.radius is not None else words.L(args.n + 1)
    return Report(config.command, config.to_json(), None, words.check_P3_window(args.n, radius))


def cmd_cx_refute(args, config):
    z, where = lifted_window(args.n, args.height, args.seed, args.half_width)
    return Report(config.command, config.to_json(), None,
                  periodize_and_refute(z, args.n, args.k, where).to_json())


def cmd_cx_entropy(args, config):
    return Report(config.command, config.to_json(), None,
                  WordSystem().density_report(args.radius))


def cmd_cx_subwords(args, config):
    found = WordSystem().subwords(args.length)
    return Report(config.command, config.to_json(), None,
                  {'length': args.length, 'count': len(found), 'subwords': found})


def cmd_cx_blocks(args, config):
    words = WordSystem()
    spans = words.block_spans(args.n, args.level)
    out = spans.to_json()
    out['min_cross_distance'] = spans.min_cross_distance(words.word(args.level))
    return Report(config.command, config.to_json(), None, out)


# ============================================================================ #
# validate
# ============================================================================ #


def spec_kind(data):
    if not isinstance(data, dict):
        return 'unknown'
    if 'cover' in data:
        return 'presentation'
    if 'shapes' in data:
        return 'tiling' if 'lattice' in data else 'shapes'
    return 'sft'


def validate_spec(path) -> list:
    """Every violation found in the document at `path`; never raises on bad input."""
    try:
        data = load_json(path)
    except SpecFormatError as exc:
        return [{'level': 'error', 'code': 'malformed-json', 'message': str(exc),
                 'offset': exc.offset}]
    except RefusalError as exc:
        return [{'level': 'error', 'code': 'unreadable', 'message': str(exc)}]
    kind = spec_kind(data)
    notes = []
    try:
        if kind == 'presentation':
            notes.extend(presentation_violations(data))
        elif kind in ('shapes', 'tiling'):
            system = ShapeSystem.from_json(data, check=False)
            notes.extend({'level': 'error', **v} for v in system.violations())
            if kind == 'tiling' and not notes:
                PeriodicTiling.from_json(data, system)
        elif kind == 'sft':
            sft_from_json(data, notes)
        else:
            notes.append({'level': 'error', 'code': 'unknown-document',
                          'message': "expected a JSON object"})
    except RefusalError as exc:
        notes.append({'level': 'error', 'code': f"{kind}-invalid", 'message': str(exc)})
    return notes


def cmd_validate(args, config):
    notes = validate_spec(args.path)
    out = {'path': args.path, 'diagnostics': notes,
           'valid': not any(n['level'] == 'error' for n in notes)}
    return Report(config.command, config.to_json(), None, out)


# ============================================================================ #
# Parser
# ============================================================================ #


def _combing_args(p, L_default=None, eps_default=None):
    p.add_argument('--L', type=int, default=L_default, required=L_default is None,
                   help='side of the tiling box')
    p.add_argument('--eps', type=float, default=eps_default, required=eps_default is None)
    p.add_argument('--delta', type=float, default=None,
                   help='override delta (default: derived from eps)')
    p.add_argument('--max-steps', type=int, default=params.DEFAULT_MAX_STEPS)
    p.add_argument('--strict', action='store_true',
                   help='refuse when the invariance hypotheses do not hold')
    p.add_argument('--samples', type=int, default=params.DECOMPOSITION_SAMPLES,
                   help='chain steps receiving the counting diagnostic')


def _tiling_source(p):
    p.add_argument('--tiling', help='periodic tiling JSON (default: the box tiling)')
    p.add_argument('--box', type=int, default=2, help='box side when no --tiling is given')
    p.add_argument('--dim', type=int, default=2, choices=(1, 2))


def build_parser():
    parser = argparse.ArgumentParser(prog='shiftforge',
                                     description='Symbolic dynamics over Z and Z^2')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    parser.add_argument('--threads', type=int, default=None,
                        help='worker processes for sampling (default: SHIFTFORGE_THREADS)')

    io = argparse.ArgumentParser(add_help=False)
    io.add_argument('--out', help='write the JSON report here instead of stdout')
    io.add_argument('--csv', help='write the report table as CSV')

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument('--window', '--window-size', dest='window', type=int, required=True,
                        help='side n of the window [0, n)^d')
    window.add_argument('--margin', type=int, default=None,
                        help='local-admissibility margin (d=2)')

    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('count', parents=[io, window], help='count patterns on a window')
    p.add_argument('--sft', required=True)
    p.add_argument('--emit', help='also write the pattern list')
    p.set_defaults(func=cmd_count)

    p = sub.add_parser('entropy', parents=[io, window], help='window entropy h(F, X)')
    p.add_argument('--sft', required=True)
    p.set_defaults(func=cmd_entropy)

    tiling = sub.add_parser('tiling', help='tilings and their encodings')
    tsub = tiling.add_subparsers(dest='action', required=True)
    p = tsub.add_parser('encode', parents=[io], help='encode a periodic tiling on a window')
    _tiling_source(p)
    p.add_argument('--window', type=int, required=True)
    p.add_argument('--emit')
    p.set_defaults(func=cmd_tiling_encode)
    p = tsub.add_parser('verify', parents=[io], help='rule R1 checks')
    _tiling_source(p)
    p.add_argument('--shapes', help='shape system JSON')
    p.add_argument('--pattern', help='labelling to check')
    p.add_argument('--torus', type=int, help='compare R1 labellings and exact covers of the torus')
    p.set_defaults(func=cmd_tiling_verify)
    p = tsub.add_parser('approx', parents=[io], help='inner/outer tile approximations')
    _tiling_source(p)
    p.add_argument('--window', type=int, required=True)
    p.add_argument('--offset', type=int, nargs='+')
    p.add_argument('--eps', help='tolerance as an exact rational, e.g. 1/4')
    p.set_defaults(func=cmd_tiling_approx)

    p = sub.add_parser('comb', parents=[io, window], help='run the entropy-combing chain')
    p.add_argument('--sft', required=True)
    _combing_args(p)
    p.add_argument('--no-decompose', action='store_true')
    p.add_argument('--project', action='store_true', help='include X-layer projections')
    p.add_argument('--target', type=float, nargs=2, metavar=('LO', 'HI'),
                   help='pick an SFT between --sub and X with entropy in [LO, HI]')
    p.add_argument('--sub', help='subsystem Y for --target (default: empty)')
    p.set_defaults(func=cmd_comb)

    cover = sub.add_parser('cover', help='small-gap SFT covers of sofic shifts')
    csub = cover.add_subparsers(dest='action', required=True)
    for name, func, text in (('build', cmd_cover_build, 'build the cover'),
                             ('gap', cmd_cover_gap, 'sample the entropy gap'),
                             ('dense', cmd_cover_dense, 'sofic subsystem at a target entropy'),
                             ('nest', cmd_cover_nest, 'nest bracketing a target entropy')):
        p = csub.add_parser(name, parents=[io, window], help=text)
        p.add_argument('--presentation', help='SoficPresentation JSON (default: even shift)')
        _combing_args(p, L_default=3, eps_default=1.0)
        p.set_defaults(func=func)
        if name == 'build':
            p.add_argument('--emit', help='write the cover as a presentation')
        if name == 'gap':
            p.add_argument('--seed', type=int, default=0)
            p.add_argument('--control', nargs=2, metavar=('X', 'T'),
                           help='also sample the product X x T projected to X')
            p.set_defaults(samples=8)
        if name in ('dense', 'nest'):
            p.add_argument('--chain-L', type=int, default=None,
                           help='tile side for the chain on the cover (default: L + 2)')
            p.add_argument('--chain-eps', type=float, default=None)
        if name == 'dense':
            p.add_argument('--target', type=float, nargs=2, required=True, metavar=('LO', 'HI'))
            p.add_argument('--sub', help='subsystem V of the sofic shift (default: empty)')
            p.add_argument('--emit', help='write the result presentation')
        if name == 'nest':
            p.add_argument('--r', type=float, required=True)
            p.add_argument('--budget', type=int, default=3)
            p.add_argument('--schedule', type=float, nargs='+', required=True)

    cx = sub.add_parser('cx', help='the word system and its lift')
    xsub = cx.add_subparsers(dest='action', required=True)
    p = xsub.add_parser('freq', parents=[io], help='levels, lengths and 1-frequencies')
    p.add_argument('--levels', type=int, default=params.MATERIALIZE_LEVEL)
    p.set_defaults(func=cmd_cx_freq)
    p = xsub.add_parser('find', parents=[io], help='locate 0^n 1 0^n in x*')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--radius', type=int, default=None, help='default: L_{n+1}')
    p.set_defaults(func=cmd_cx_find)
    p = xsub.add_parser('refute', parents=[io], help='periodize a lifted window')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--height', type=int, default=4096)
    p.add_argument('--seed', type=int, default=None, help='random primes (default: all 1)')
    p.add_argument('--half-width', type=int, default=None)
    p.set_defaults(func=cmd_cx_refute)
    p = xsub.add_parser('entropy', parents=[io], help='density and lift-count bound')
    p.add_argument('--radius', type=int, required=True)
    p.set_defaults(func=cmd_cx_entropy)
    p = xsub.add_parser('subwords', parents=[io], help='length-N language of X')
    p.add_argument('--length', type=int, required=True)
    p.set_defaults(func=cmd_cx_subwords)
    p = xsub.add_parser('blocks', parents=[io], help='block decomposition of w^level')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--level', type=int, required=True)
    p.set_defaults(func=cmd_cx_blocks)

    p = sub.add_parser('validate', parents=[io], help='list problems in an input document')
    p.add_argument('path')
    p.set_defaults(func=cmd_validate)
    return parser


# ============================================================================ #
# Entry points
# ============================================================================ #


def emit(report: Report, args):
    if args.out:
        report.write_json(args.out)
    else:
        sys.stdout.write(report.dumps())
    if args.csv and not report.write_csv(args.csv):
        log.warning("[cli] %s has no table to write as CSV", report.command)


def dispatch(args) -> int:
    config = RunConfig.from_args(args)
    try:
        report = args.func(args, config)
        emit(report, args)
    except RefusalError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except Exception:
        log.exception("[cli] internal error in %s", config.command)
        return EXIT_INTERNAL
    finally:
        pool.shutdown_pool()
    return EXIT_OK


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_REFUSED
    return dispatch(args)
