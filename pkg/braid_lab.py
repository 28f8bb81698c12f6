"""
braid_lab: command-line experiments on rigid pseudo-Anosov braids

    python braid_lab.py nf --n 3 "s1 S2"
    python braid_lab.py counts --n 3 --lmax 20 --format csv --out counts.csv
    python braid_lab.py spectrum --n 4 --patterns xA xB
    python braid_lab.py verify --n 3

Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 resource cap.
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional

from acceptance import run_acceptance
from braid_core import (
    BraidError,
    BraidWord,
    NormalForm,
    SimpleBraid,
    canonical_length,
    delta,
    format_normal_form,
    inf,
    is_rigid,
    normal_form,
    sup,
    x_A,
    x_B,
)
from census import (
    CONVENTION_NOTE,
    CensusError,
    ball_rigid_bound,
    measure_pa_proportion,
    proportion_table,
    rigid_sphere_bounds,
    sphere_table,
)
from config import ConfigError, RunConfig
from curves import CurveError
from lw_graph import (
    GraphError,
    LiftCapExceeded,
    cached_graph,
    check_length5,
    count_table,
    forbidden_lift,
    graph_cache_payload,
    pattern_label,
    ratio_spectrum,
    spectral_radius,
)
from pa_certifier import certify
from report_writer import emit
from run_logger import banner, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class WordParseError(ValueError):
    """Unreadable braid word; position is the 1-based token index"""

    def __init__(self, message: str, position: int):
        super().__init__(f"token {position}: {message}")
        self.position = position


def parse_word(text: str, n: int) -> BraidWord:
    """Tokens 's3' (sigma_3), 'S3' (its inverse), 'D' (Delta) and 'd' (Delta^-1)"""
    letters = []
    delta_word = delta(n).word()
    for position, token in enumerate(text.split(), start=1):
        if token == 'D':
            letters.extend((i, 1) for i in delta_word)
        elif token == 'd':
            letters.extend((i, -1) for i in reversed(delta_word))
        elif token[0] in 'sS' and token[1:].isdigit():
            i = int(token[1:])
            if not 1 <= i <= n - 1:
                raise WordParseError(f"generator '{token}' out of range for n={n}", position)
            letters.append((i, 1 if token[0] == 's' else -1))
        else:
            raise WordParseError(f"unknown token '{token}'", position)
    return BraidWord(n, tuple(letters))


def parse_pattern(text: str, n: int) -> NormalForm:
    """'xA', 'xB', or factors written 's1 . s1 s2'"""
    if text in ('xA', 'x_A'):
        return x_A(n)
    if text in ('xB', 'x_B'):
        return x_B(n)
    factors = []
    for position, chunk in enumerate(text.split('.'), start=1):
        try:
            word = parse_word(chunk, n)
        except WordParseError as e:
            raise WordParseError(f"pattern factor {position}: {e}", e.position) from None
        if any(sign < 0 for _, sign in word.letters):
            raise WordParseError(f"pattern factor {position} is not positive", position)
        factors.append(SimpleBraid.from_word(n, [i for i, _ in word.letters]))
    return NormalForm(n, 0, tuple(factors))


def _patterns(config: RunConfig) -> List[NormalForm]:
    """--patterns parsed for the configured strand count"""
    return [parse_pattern(p, config.n) for p in config.patterns]


def _emit(config: RunConfig, title: str, payload: Dict, rows=None, columns=(), header_lines=()):
    """Write the report to --out, or print it when no file was asked for"""
    text = emit(payload, rows, columns, config.out, config.fmt, header_lines)
    if config.out:
        banner(title)
        print(f"✓ wrote {config.out}")
    else:
        sys.stdout.write(text)


def cmd_nf(args, config: RunConfig) -> int:
    """Normal form of a word with inf, sup, canonical length and rigidity"""
    x = normal_form(parse_word(args.word, config.n))
    payload = {
        'n': x.n,
        'normal_form': format_normal_form(x),
        'inf': inf(x),
        'sup': sup(x),
        'length': canonical_length(x),
        'rigid': is_rigid(x) if x.factors else None,
    }
    if args.json or config.out:
        _emit(config, "NORMAL FORM", payload)
        return EXIT_OK
    print(format_normal_form(x))
    rigid = payload['rigid']
    print(f"inf {payload['inf']}  sup {payload['sup']}  length {payload['length']}  "
          f"rigid {'n/a' if rigid is None else 'yes' if rigid else 'no'}")
    return EXIT_OK


def cmd_graph(args, config: RunConfig) -> int:
    """Graph size and the length-5 check; --out writes the cache payload"""
    g = cached_graph(config.n, config.cache_dir)
    cert = check_length5(g)
    if config.out:
        _emit(config, f"LEFT-WEIGHTING GRAPH n={config.n}", graph_cache_payload(g))
    else:
        print(f"n={g.n}: {g.size} vertices, {g.edge_count} edges")
        print(f"{'✓' if cert.holds else '✗'} every vertex pair joined by a path of length 5")
    return EXIT_OK if cert.holds else EXIT_FAILED


def cmd_counts(args, config: RunConfig) -> int:
    """N, N° and, with --patterns, the avoiding counts for l = 0..lmax"""
    g = cached_graph(config.n, config.cache_dir)
    table = count_table(g, config.lmax, _patterns(config), config.lift_cap)
    payload = {
        'n': table.n,
        'patterns': table.patterns,
        'rows': table.rows(),
    }
    header = [f"n={table.n}", f"patterns={'; '.join(table.patterns) or 'none'}", CONVENTION_NOTE]
    _emit(config, f"PATH COUNTS n={config.n}", payload, table.rows(), ['l', 'N', 'N°', 'N_w', 'N°_w'], header)
    return EXIT_OK


def cmd_spectrum(args, config: RunConfig) -> int:
    """Spectral radius of Gamma_n by two methods, then of each pattern-avoiding lift"""
    g = cached_graph(config.n, config.cache_dir)
    patterns = _patterns(config) or [x_A(config.n), x_B(config.n)]
    base = spectral_radius(g)
    entries = [{'graph': 'base', **base.to_dict()}]
    rows = [{'graph': 'base', 'method': base.method, 'gamma': f"{base.gamma:.12f}",
             'residual': f"{base.residual:.3e}", 'l_used': str(base.l_used)}]
    ratio = ratio_spectrum(g)
    entries.append({'graph': 'base', **ratio.to_dict()})
    rows.append({'graph': 'base', 'method': ratio.method, 'gamma': f"{ratio.gamma:.12f}",
                 'residual': f"{ratio.residual:.3e}", 'l_used': str(ratio.l_used)})
    for pattern in patterns:
        gk = forbidden_lift(g, [pattern], config.lift_cap)
        report = spectral_radius(gk)
        label = f"avoid {pattern_label(pattern)}"
        entries.append({'graph': label, 'lift_order': gk.k, **report.to_dict()})
        rows.append({'graph': label, 'method': report.method, 'gamma': f"{report.gamma:.12f}",
                     'residual': f"{report.residual:.3e}", 'l_used': str(report.l_used)})
    _emit(config, f"SPECTRAL RADII n={config.n}", {'n': config.n, 'spectra': entries},
          rows, ['graph', 'method', 'gamma', 'residual', 'l_used'])
    return EXIT_OK


def cmd_certify(args, config: RunConfig) -> int:
    """Verdict for one rigid braid"""
    x = normal_form(parse_word(args.word, config.n))
    verdict = certify(x, tau_closed=args.tau_closed)
    payload = verdict.to_dict()
    payload['normal_form'] = format_normal_form(x)
    _emit(config, "CERTIFICATION", payload)
    return EXIT_OK


def cmd_sphere(args, config: RunConfig) -> int:
    """Sphere sizes by shape, with rigid pA lower bounds under --rigid"""
    g = cached_graph(config.n, config.cache_dir)
    spheres = sphere_table(g, config.lmax)
    bounds = rigid_sphere_bounds(g, config.lmax, config.lift_cap) if args.rigid else []
    rows = [s.row() for s in spheres]
    for row, bound in zip(rows, bounds):
        row['rigid_pa_even_k'] = str(bound.even_k)
        row['rigid_pa_all_k'] = str(bound.all_k)
    columns = ['l', 'shape_i', 'shape_ii', 'shape_iii', 'total']
    if bounds:
        columns += ['rigid_pa_even_k', 'rigid_pa_all_k']
    _emit(config, f"SPHERES n={config.n}", {'n': config.n, 'convention': CONVENTION_NOTE, 'rows': rows},
          rows, columns, [f"n={config.n}", CONVENTION_NOTE])
    return EXIT_OK


def cmd_ball(args, config: RunConfig) -> int:
    """Ball sizes, with rigid pA lower bounds under --rigid"""
    g = cached_graph(config.n, config.cache_dir)
    bounds = rigid_sphere_bounds(g, config.lmax, config.lift_cap) if config.lmax >= 1 and args.rigid else []
    rows = []
    total = 1
    for sphere in sphere_table(g, config.lmax):
        total += sphere.total
        row = {'l': str(sphere.l), 'ball': str(total)}
        if bounds:
            row['rigid_pa_even_k'] = str(ball_rigid_bound(bounds, sphere.l)[0])
        rows.append(row)
    columns = ['l', 'ball'] + (['rigid_pa_even_k'] if bounds else [])
    _emit(config, f"BALLS n={config.n}", {'n': config.n, 'convention': CONVENTION_NOTE, 'rows': rows},
          rows, columns, [f"n={config.n}", CONVENTION_NOTE])
    return EXIT_OK


def cmd_sample(args, config: RunConfig) -> int:
    """Certified fraction of uniform rigid braids against the exact bound, for --r or each of --r-values"""
    g = cached_graph(config.n, config.cache_dir)
    columns = ['l', 'exact_bound_num', 'exact_bound_den', 'sampled', 'ci_lo', 'ci_hi']
    header = [f"n={config.n} seed={config.seed} samples={config.samples}", CONVENTION_NOTE]
    if args.r_values:
        table = proportion_table(g, args.r_values, config.samples, config.seed, config.threads,
                                 cap=config.lift_cap, cache_dir=config.cache_dir,
                                 check_soundness=args.check_soundness)
        rows = [row.row() for row in table]
        payload = {
            'n': config.n,
            'seed': config.seed,
            'samples': config.samples,
            'convention': CONVENTION_NOTE,
            'rows': rows,
        }
        _emit(config, f"RIGID PSEUDO-ANOSOV PROPORTIONS n={config.n}", payload, rows, columns, header)
        violations = sum(row.report.soundness_violations for row in table if row.report)
        return EXIT_FAILED if violations else EXIT_OK

    report = measure_pa_proportion(g, config.r, config.samples, config.seed, config.threads,
                                   check_soundness=args.check_soundness, cap=config.lift_cap,
                                   cache_dir=config.cache_dir)
    payload = report.to_dict()
    lo, hi = report.ci
    rows = [{
        'l': str(report.l),
        'exact_bound_num': payload['exact_bound_num'] or '',
        'exact_bound_den': payload['exact_bound_den'] or '',
        'sampled': f"{report.proportion_certified:.6f}",
        'ci_lo': f"{lo:.6f}",
        'ci_hi': f"{hi:.6f}",
    }]
    _emit(config, f"RIGID PSEUDO-ANOSOV SAMPLING n={config.n} r={config.r}", payload, rows, columns, header)
    if report.error:
        print(f"✗ {report.error}", file=sys.stderr)
        return EXIT_FAILED
    if report.soundness_violations:
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args, config: RunConfig) -> int:
    """Acceptance checks for --n; any failed check gives exit code 1"""
    banner(f"ACCEPTANCE n={config.n}")
    g = cached_graph(config.n, config.cache_dir)
    results = run_acceptance(g, config.samples, config.seed, config.threads, config.lift_cap, config.cache_dir)
    return EXIT_FAILED if any(ok is False for ok in results.values()) else EXIT_OK


COMMANDS = {
    'nf': cmd_nf,
    'graph': cmd_graph,
    'counts': cmd_counts,
    'spectrum': cmd_spectrum,
    'certify': cmd_certify,
    'sphere': cmd_sphere,
    'ball': cmd_ball,
    'sample': cmd_sample,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    """Subcommands share one parent parser holding the common options"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3)
    common.add_argument("--l", type=int, default=None)
    common.add_argument("--lmax", type=int, default=None)
    common.add_argument("--r", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", dest="fmt", choices=['json', 'csv'], default=None)
    common.add_argument("--cache", dest="cache_dir", default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--lift-cap", dest="lift_cap", type=int, default=None)
    common.add_argument("--patterns", nargs='*', default=None,
                        help="xA, xB, or factors like 's1 . s1 s2'")
    common.add_argument("--log-dir", dest="log_dir", default=None)
    common.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="braid_lab", description="Rigid pseudo-Anosov braid census")
    sub = parser.add_subparsers(dest="command", required=True)
    nf = sub.add_parser("nf", parents=[common], help="left normal form of a word")
    nf.add_argument("word", nargs='?', default='')
    nf.add_argument("--json", action="store_true")
    sub.add_parser("graph", parents=[common], help="left-weighting graph summary or cache file")
    sub.add_parser("counts", parents=[common], help="N, N°, N_w, N°_w up to lmax")
    sub.add_parser("spectrum", parents=[common], help="spectral radii of the graph and avoiding lifts")
    cert = sub.add_parser("certify", parents=[common], help="certify a rigid braid")
    cert.add_argument("word")
    cert.add_argument("--tau-closed", action="store_true", help="match tau-images of patterns for odd infimum")
    for name, text in (("sphere", "sphere sizes by normal-form shape"), ("ball", "ball sizes")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--rigid", action="store_true", help="add rigid pseudo-Anosov lower bounds")
    sample = sub.add_parser("sample", parents=[common], help="certified fraction of uniform rigid braids")
    sample.add_argument("--check-soundness", action="store_true")
    sample.add_argument("--r-values", dest="r_values", type=int, nargs="+", default=None,
                        help="several factor counts at once; writes the proportions table")
    sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse, configure logging, run the command and map errors to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    lmax = args.lmax if args.lmax is not None else args.l
    try:
        config = RunConfig.from_env(
            n=args.n, l=args.l, lmax=lmax, r=args.r, seed=args.seed, samples=args.samples,
            out=args.out, fmt=args.fmt, cache_dir=args.cache_dir, threads=args.threads,
            lift_cap=args.lift_cap, patterns=args.patterns, log_dir=args.log_dir,
        ).validate()
    except ConfigError as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(config.log_dir, args.verbose)
    logger.info(f"braid_lab {args.command}: {config}")

    try:
        return COMMANDS[args.command](args, config)
    except LiftCapExceeded as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_CAP
    except (WordParseError, BraidError, CurveError, GraphError, CensusError, ConfigError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"✗ cannot write output: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
