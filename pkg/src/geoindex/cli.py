"""Command-line front end and property self-test suites.

Subcommands map onto the library analyses: `indices`, `stability`, `bott`,
`analyze` (free combination), `selftest` (randomized property sweeps) and
`export-csv` (plot-ready tables).  Reports are deterministic JSON: keys are
sorted, floats are printed with 17 significant digits, lines end with LF.

Exit codes: 0 success, 1 bad configuration, 2 analysis error (numerics did
not certify), 3 mathematical-identity violation (an exact integer identity
failed, which should break the build rather than look like noise).
"""
import argparse
import json
import sys as _sys

import numpy as np

from .integrator import AccuracyError
from .maslov import (CROSS_TOL, KERNEL_TOL, DegeneratePathError, LagrangianPath,
                     clm_index, iota_omega)
from .symplectic import standard_J, diamond
from .system import (SCENARIO_NAMES, scenario, system_from_dict,
                     system_to_dict, twist_lift)
from .indices import (block_fact_check, bott_check, fundamental_solution,
                      nullity, prop55_check, spectral_index_spath,
                      theorem_A_check)
from .stability import (ClusteredSpectrumError, classify_stability,
                        instability_criterion, poincare_map,
                        splitting_numbers, strong_stability_check,
                        theorem_F_check)

__all__ = ['main', 'run', 'build_report', 'emit_csv', 'dumps_report',
           'lemma54_sweep', 'clm_property_suite', 'splitting_additivity_suite']

_ANALYSES = ('indices', 'stability', 'bott', 'theoremA', 'theoremF', 'selftest')


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- reporting

def _fmt(x):
    """One JSON value with fixed float formatting."""
    if isinstance(x, bool):
        return 'true' if x else 'false'
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not np.isfinite(v):
            raise ValueError("non-finite value in report")
        return f'{v:.17g}'
    if x is None:
        return 'null'
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        items = sorted(x.items())
        return '{' + ','.join(f'{json.dumps(str(k))}:{_fmt(v)}'
                              for k, v in items) + '}'
    if isinstance(x, (list, tuple)):
        return '[' + ','.join(_fmt(v) for v in x) + ']'
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps_report(report):
    """Deterministic JSON text: sorted keys, 17 significant digits, LF."""
    return _fmt(report) + '\n'


def _cplx(z):
    z = complex(z)
    return {'re': z.real, 'im': z.imag}


def _omega_key(w):
    w = complex(w)
    return f'{w.real:.17g}{w.imag:+.17g}j'


# ------------------------------------------------------------ omega parsing

def parse_omegas(spec):
    """Comma list of unit complexes; `roots:m` expands to the m-th roots."""
    out = []
    for tok in str(spec).split(','):
        tok = tok.strip()
        if not tok:
            continue
        if tok.startswith('roots:'):
            try:
                m = int(tok.split(':', 1)[1])
            except ValueError:
                raise ConfigError(f"bad root count in {tok!r}")
            if m < 1 or m > 12:
                raise ConfigError("roots:m needs 1 <= m <= 12")
            for k in range(m):
                out.append(np.exp(2j * np.pi * k / m))
            continue
        try:
            w = complex(tok.replace('i', 'j') if tok in ('i', '-i') else tok)
        except ValueError:
            raise ConfigError(f"cannot parse omega {tok!r}")
        out.append(w)
    cleaned = []
    for w in out:
        w = complex(w)
        if abs(abs(w) - 1) > 1e-9:
            raise ConfigError(f"omega {w} is not on the unit circle")

        def snap(x):
            for v in (-1.0, 0.0, 1.0):
                if abs(x - v) < 1e-12:
                    return v
            return x
        cleaned.append(complex(snap(w.real), snap(w.imag)))
    if not cleaned:
        raise ConfigError("empty omega list")
    return cleaned


def _load_system(args):
    if getattr(args, 'file', None):
        try:
            with open(args.file, encoding='utf-8') as fh:
                return system_from_dict(json.load(fh))
        except (OSError, KeyError, ValueError) as exc:
            raise ConfigError(f"cannot load scenario file: {exc}")
    name = getattr(args, 'scenario', None)
    if not name:
        raise ConfigError("need --scenario NAME or --file PATH")
    try:
        return scenario(name)
    except KeyError:
        raise ConfigError(
            f"unknown scenario {name!r}; catalog: {', '.join(SCENARIO_NAMES)}")


# ------------------------------------------------------- property selftests

def lemma54_sweep(rng, trials=200, k_max=4):
    """Random off-diagonal blocks B of every rank 0..k: signature balance.

    For M = [[0, B], [B*, 0]] the nullity must equal 2 dim ker B and the
    positive and negative counts must agree, exactly.
    """
    fails = 0
    for j in range(trials):
        k = int(rng.integers(1, k_max + 1))
        r = int(rng.integers(0, k + 1))
        if r == 0:
            B = np.zeros((k, k), dtype=complex)
        else:
            X = rng.normal(size=(k, r)) + 1j * rng.normal(size=(k, r))
            Y = rng.normal(size=(r, k)) + 1j * rng.normal(size=(r, k))
            B = X @ Y
        if not block_fact_check(B):
            fails += 1
    return {'trials': trials, 'fails': fails, 'ok': fails == 0}


def _random_graph_path(rng, k, npts=121):
    """Graph of a Hermitian path H(t) = H0 + t H1 + sin(pi t) H2."""
    def herm():
        Z = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
        return 0.5 * (Z + Z.conj().T)

    H0, H1, H2 = 2.0 * herm(), 3.0 * herm(), herm()

    def fn(t):
        H = H0 + t * H1 + np.sin(np.pi * t) * H2
        return np.vstack([np.eye(k), H])

    grid = np.linspace(0.0, 1.0, npts)
    return LagrangianPath(fn, grid, standard_J(k)), (H0, H1, H2)


def _check_one_path(rng, k):
    path, _ = _random_graph_path(rng, k)
    Zc = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    L0 = np.vstack([np.eye(k), 0.5 * (Zc + Zc.conj().T)])
    mu, recs = clm_index(L0, path, return_crossings=True)
    bad = []

    # I: invariance under a smooth monotone reparametrization
    def rep(u):
        return path.frame_fn(u * u * (3.0 - 2.0 * u))
    if clm_index(L0, LagrangianPath(rep, path.grid, path.form)) != mu:
        bad.append('reparametrization')

    # II: additivity under concatenation at an interior non-crossing time
    c = 0.4371
    if any(abs(r.t - c) < 5e-3 for r in recs):
        c = 0.6133
    left = LagrangianPath(path.frame_fn, np.linspace(0.0, c, 61), path.form)
    right = LagrangianPath(path.frame_fn, np.linspace(c, 1.0, 61), path.form)
    if clm_index(L0, left) + clm_index(L0, right) != mu:
        bad.append('path-additivity')

    # III: invariance under a symplectic change of coordinates
    S = rng.normal(size=(2 * k, 2 * k))
    M = np.asarray(_expm(path.form @ (0.3 * (S + S.T))))
    moved = LagrangianPath(lambda t: M @ path.frame_fn(t), path.grid, path.form)
    if clm_index(M @ L0, moved) != mu:
        bad.append('symplectic-invariance')

    # V: a constant path away from the cycle contributes zero
    const = LagrangianPath(lambda t: path.frame_fn(0.0),
                           np.linspace(0.0, 1.0, 21), path.form)
    if clm_index(L0, const) != 0:
        bad.append('constant-zero')
    return mu, bad


def clm_property_suite(rng, n_paths=100):
    """Randomized sweep of the intersection-index axioms.

    Per path: reparametrization invariance, additivity under concatenation,
    symplectic invariance, zero on constant paths; plus direct-sum
    additivity on paired one-dimensional paths.
    """
    failures = []
    degenerate = 0
    for j in range(n_paths):
        k = int(rng.integers(1, 3))
        try:
            _, bad = _check_one_path(rng, k)
        except DegeneratePathError:
            degenerate += 1
            continue
        for b in bad:
            failures.append((j, b))

    # IV: direct-sum additivity, graphs compose blockwise
    for j in range(max(4, n_paths // 10)):
        try:
            p1, h1 = _random_graph_path(rng, 1)
            p2, h2 = _random_graph_path(rng, 1)
            c1 = float(rng.normal())
            c2 = float(rng.normal())
            L1 = np.vstack([np.eye(1), [[c1]]])
            L2 = np.vstack([np.eye(1), [[c2]]])

            def fn(t):
                H = np.diag([float((h1[0] + t * h1[1]
                                    + np.sin(np.pi * t) * h1[2]).real[0, 0]),
                             float((h2[0] + t * h2[1]
                                    + np.sin(np.pi * t) * h2[2]).real[0, 0])])
                return np.vstack([np.eye(2), H])

            both = LagrangianPath(fn, p1.grid, standard_J(2))
            L12 = np.vstack([np.eye(2), np.diag([c1, c2])])
            s = clm_index(L12, both)
            if s != clm_index(L1, p1) + clm_index(L2, p2):
                failures.append((j, 'direct-sum'))
        except DegeneratePathError:
            degenerate += 1
    return {'paths': n_paths, 'failures': failures, 'degenerate': degenerate,
            'ok': not failures}


def _random_symplectic(rng, k, scale=0.8):
    S = rng.normal(size=(2 * k, 2 * k))
    return np.asarray(_expm(standard_J(k) @ (scale * (S + S.T))))


def splitting_additivity_suite(rng, pairs=20):
    """S(M1 diamond M2) = S(M1) + S(M2) componentwise on random pairs."""
    fails = []
    done = 0
    attempts = 0
    while done < pairs and attempts < 20 * pairs:
        attempts += 1
        M1 = _random_symplectic(rng, 1)
        M2 = _random_symplectic(rng, int(rng.integers(1, 3)))
        phi = float(rng.uniform(0.0, 2 * np.pi))
        w = complex(np.exp(1j * phi))
        # half the draws probe at an actual unit eigenvalue of M1
        ev = np.linalg.eigvals(M1)
        unit = ev[(np.abs(np.abs(ev) - 1) < 1e-9) & (ev.imag > 0.15)]
        if len(unit) and rng.random() < 0.5:
            w = complex(unit[0] / abs(unit[0]))
        try:
            s12 = splitting_numbers(diamond(M1, M2), w)
            s1 = splitting_numbers(M1, w)
            s2 = splitting_numbers(M2, w)
        except (ClusteredSpectrumError, DegeneratePathError):
            continue
        done += 1
        if (s1[0] + s2[0], s1[1] + s2[1]) != s12:
            fails.append((done, w, s1, s2, s12))
    return {'pairs': done, 'fails': fails, 'ok': done >= pairs and not fails}


def _expm(M):
    from scipy.linalg import expm
    return expm(M)


# ------------------------------------------------------------- report body

def _indices_section(sys, omegas):
    out = []
    violations = 0
    for w in omegas:
        rep = theorem_A_check(sys, w)
        out.append({'omega': _cplx(rep.omega), 'i_geo': rep.i_geo,
                    'nullity': rep.nullity, 'i_spec_thmA': rep.i_spec_thmA,
                    'i_spec_spath': rep.i_spec_spath, 's0': rep.s0,
                    'routes_agree': rep.routes_agree})
        if not rep.routes_agree:
            violations += 1
    return out, violations


def _stability_section(sys, tol=None):
    P = poincare_map(sys)
    rep = classify_stability(P, tol=tol)
    i_spec = spectral_index_spath(sys, 1.0)
    verdict = instability_criterion(sys, i_spec)
    violated = bool(rep.linearly_stable and verdict == 'unstable_by_parity')
    sec = {
        'eigenvalues': [dict(_cplx(lam), algebraic=alg, geometric=geo)
                        for lam, alg, geo in rep.eigenvalues],
        'on_circle': rep.on_circle, 'semisimple': rep.semisimple,
        'linearly_stable': rep.linearly_stable, 'marginal': rep.marginal,
        'krein': [dict(_cplx(k.lam), p=k.p, q=k.q) for k in rep.krein],
        'strongly_stable': strong_stability_check(P),
        'i_spec': i_spec, 'parity_verdict': verdict,
        'parity_consistent': not violated,
    }
    return sec, (1 if violated else 0), rep


def _bott_section(sys, m):
    b = bott_check(sys, m)
    sec = {'m': m, 'lhs': b['lhs'], 'rhs': b['rhs'], 'equal': b['equal'],
           'nullity_lhs': b['nullity_lhs'], 'nullity_rhs': b['nullity_rhs'],
           'nullity_equal': b['nullity_equal'],
           'per_omega': {_omega_key(w): v for w, v in b['per_omega'].items()}}
    return sec, 0 if (b['equal'] and b['nullity_equal']) else 1


def build_report(sys, analyses, omegas, m=2, max_m=6, seed=0, tol_rank=1e-10,
                 tol_stability=None):
    """Assemble the full JSON report; returns (report, exit_code)."""
    violations = 0
    report = {
        'scenario': system_to_dict(sys),
        'orientation': sys.orientation,
        'indices': [], 'stability': None, 'bott': None,
        'checks': {'theoremA': None, 'prop55': None, 'lemma54': None},
        'diagnostics': {
            'analyses': sorted(analyses),
            'omegas': [_cplx(w) for w in omegas],
            'seed': seed, 'max_m': max_m,
            'tolerances': {'cross': CROSS_TOL, 'kernel': KERNEL_TOL,
                           'rank': tol_rank,
                           'stability': tol_stability if tol_stability
                           is not None else 'auto'},
            'integrator_rtol': 1e-9,
        },
    }
    if 'indices' in analyses or 'theoremA' in analyses:
        rows, bad = _indices_section(sys, omegas)
        report['indices'] = rows
        report['checks']['theoremA'] = bad == 0
        violations += bad
    if 'stability' in analyses:
        sec, bad, _ = _stability_section(sys, tol=tol_stability)
        report['stability'] = sec
        violations += bad
    if 'bott' in analyses:
        sec, bad = _bott_section(sys, m)
        report['bott'] = sec
        violations += bad
    if 'theoremF' in analyses:
        tf = theorem_F_check(sys, max_m)
        report['diagnostics']['theoremF'] = {
            'applies': tf['applies'],
            'iterate_morse_indices': list(tf['iterate_morse_indices']),
            'not_strongly_stable': tf.get('not_strongly_stable')}
        if tf['applies'] and not tf['not_strongly_stable']:
            violations += 1
    if 'selftest' in analyses:
        rng = np.random.default_rng(seed)
        l54 = lemma54_sweep(rng, trials=200)
        p55 = all(prop55_check(sys, w) for w in (1.0, -1.0, 1j, -1j))
        report['checks']['lemma54'] = l54['ok']
        report['checks']['prop55'] = p55
        report['diagnostics']['lemma54_fails'] = l54['fails']
        violations += (not l54['ok']) + (not p55)
    code = 3 if violations else 0
    return report, code


def emit_csv(report, outdir, sys=None, omegas=()):
    """Plot-ready tables next to the JSON report.

    eigenvalues.csv needs a stability section, indices.csv an indices
    section; crossings.csv lists the geometric-route crossings per omega.
    """
    import os
    os.makedirs(outdir, exist_ok=True)
    wrote = []

    def _w(name, header, rows):
        path = os.path.join(outdir, name)
        with open(path, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(','.join(header) + '\n')
            for row in rows:
                fh.write(','.join(
                    f'{v:.17g}' if isinstance(v, float) else str(v)
                    for v in row) + '\n')
        wrote.append(path)

    stab = report.get('stability')
    if stab:
        kmap = {(round(k['re'], 9), round(k['im'], 9)): (k['p'], k['q'])
                for k in stab['krein']}
        rows = []
        for e in stab['eigenvalues']:
            lam = complex(e['re'], e['im'])
            p, q = kmap.get((round(e['re'], 9), round(e['im'], 9)), ('', ''))
            rows.append((e['re'], e['im'], abs(lam), p, q))
        _w('eigenvalues.csv', ('re', 'im', 'abs', 'krein_p', 'krein_q'), rows)
    if report.get('indices'):
        rows = [(r['omega']['re'], r['omega']['im'], r['i_geo'],
                 r['nullity'], r['i_spec_spath']) for r in report['indices']]
        _w('indices.csv', ('omega_re', 'omega_im', 'i_geo', 'nullity',
                           'i_spec'), rows)
    if sys is not None and len(omegas):
        rows = []
        for w in omegas:
            psi = fundamental_solution(sys)
            _, recs = iota_omega(psi, w, twist_lift(sys.A),
                                 return_crossings=True)
            for r in recs:
                rows.append((float(r.t), r.kernel_dim,
                             r.signature[0] - r.signature[2]))
        _w('crossings.csv', ('t', 'kernel_dim', 'signature'), rows)
    return wrote


# ------------------------------------------------------------------ driver

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f'error: {message}', file=_sys.stderr)
        raise SystemExit(1)


def _common(sub):
    sub.add_argument('--scenario', help='builtin catalog name')
    sub.add_argument('--file', help='scenario JSON path')
    sub.add_argument('--omegas', default='1',
                     help='comma list of unit complexes or roots:m')
    sub.add_argument('--out', help='output path (JSON report / CSV dir)')
    sub.add_argument('--seed', type=int, default=0)
    sub.add_argument('--max-m', type=int, default=6, dest='max_m')
    sub.add_argument('--tol-rank', type=float, default=1e-10, dest='tol_rank')
    sub.add_argument('--tol-stability', type=float, default=None,
                     dest='tol_stability')


def _make_parser():
    p = _Parser(prog='geoindex',
                description='index theory of twisted Morse-Sturm systems')
    subs = p.add_subparsers(dest='command')
    for name in ('analyze', 'indices', 'stability', 'bott', 'export-csv'):
        sub = subs.add_parser(name)
        _common(sub)
        if name == 'analyze':
            sub.add_argument('--analyses', default='indices,stability')
            sub.add_argument('--m', type=int, default=2)
        if name == 'bott':
            sub.add_argument('--m', type=int, default=2, required=False)
    st = subs.add_parser('selftest')
    st.add_argument('--seed', type=int, default=0)
    st.add_argument('--paths', type=int, default=40)
    st.add_argument('--trials', type=int, default=200)
    st.add_argument('--pairs', type=int, default=10)
    return p


def _write_report(report, args):
    text = dumps_report(report)
    if getattr(args, 'out', None):
        with open(args.out, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def run(argv=None):
    args = _make_parser().parse_args(argv)
    if not args.command:
        raise ConfigError('no subcommand given')

    if args.command == 'selftest':
        rng = np.random.default_rng(args.seed)
        l54 = lemma54_sweep(rng, trials=args.trials)
        clm = clm_property_suite(rng, n_paths=args.paths)
        spl = splitting_additivity_suite(rng, pairs=args.pairs)
        out = {'lemma54': {'ok': l54['ok'], 'fails': l54['fails']},
               'clm_properties': {'ok': clm['ok'],
                                  'degenerate': clm['degenerate'],
                                  'failures': len(clm['failures'])},
               'splitting_additivity': {'ok': spl['ok'],
                                        'pairs': spl['pairs']},
               'seed': args.seed}
        _sys.stdout.write(dumps_report(out))
        return 0 if (l54['ok'] and clm['ok'] and spl['ok']) else 3

    sysm = _load_system(args)
    omegas = parse_omegas(args.omegas)
    if args.command == 'bott':
        analyses = {'bott'}
    elif args.command in ('indices',):
        analyses = {'indices'}
    elif args.command == 'stability':
        analyses = {'stability'}
    elif args.command == 'export-csv':
        analyses = {'indices', 'stability'}
    else:
        analyses = {a.strip() for a in args.analyses.split(',') if a.strip()}
        if not analyses:
            raise ConfigError('empty analysis list')
        bad = analyses - set(_ANALYSES)
        if bad:
            raise ConfigError(f"unknown analyses: {', '.join(sorted(bad))}")

    report, code = build_report(
        sysm, analyses, omegas, m=getattr(args, 'm', 2), max_m=args.max_m,
        seed=args.seed, tol_rank=args.tol_rank,
        tol_stability=args.tol_stability)
    if args.command == 'export-csv':
        outdir = args.out or '.'
        files = emit_csv(report, outdir, sys=sysm, omegas=omegas)
        for f in files:
            print(f)
        return code
    _write_report(report, args)
    return code


def main(argv=None):
    try:
        code = run(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
    except ConfigError as exc:
        print(f'error: {exc}', file=_sys.stderr)
        code = 1
    except (AccuracyError, DegeneratePathError, ClusteredSpectrumError,
            np.linalg.LinAlgError, ValueError) as exc:
        print(f'analysis error: {exc}', file=_sys.stderr)
        code = 2
    _sys.exit(code)


if __name__ == '__main__':
    main()
