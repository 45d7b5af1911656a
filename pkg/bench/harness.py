"""
Experiment runner: problem construction, cached reference solutions,
relative-error metrics, CSV traces, summaries and batches.
"""
import configparser
import copy
import csv
import hashlib
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from django.conf import settings
from django.db import transaction
from django.utils.text import slugify

from optim.exceptions import ConvergenceError, DivergenceError
from optim.imaging import BlurOperator, gaussian_psf, rel_distance, simulate_data, synth_phantom
from optim.imgio import atomic_write, read_imgf64, write_imgf64, write_pgm
from optim.spdhg import METHODS, MODE_SSL, SPDHGProblem, run_method
from optim.stepsize import preset_schedule
from .models import Experiment, TraceRecord
from .plotting import plot_traces
from .serializers import SCHEDULE_KEYS, ExperimentConfigSerializer

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['k', 'time_s', 'f', 'e_k', 'f_k', 'alpha_k', 'eps_k', 'delta_l', 'u_norm']
THRESHOLDS = {'1e2': 1e-2, '1e3': 1e-3}
PROBLEM_KEYS = Experiment.CONFIG_SECTIONS['problem'][1:]


# Problems.

@dataclass
class ProblemData:
    x_true: np.ndarray
    g: np.ndarray
    op: BlurOperator
    scale: float
    problem: SPDHGProblem


def _assemble(spec, x_true, g, scale):
    psf = gaussian_psf(spec.psf_size, spec.psf_sigma)
    op = BlurOperator(psf, spec.size, background=spec.background / scale)
    return ProblemData(x_true, g, op, scale, SPDHGProblem(g, op, spec.beta, x0_policy=spec.x0_policy))


def build_problem(spec: Experiment) -> ProblemData:
    """
    Phantom, blur, Poisson counts at peak intensity i_max over background b,
    scaled back to image units. The model background is b / scale.
    """
    x_true = synth_phantom(spec.kind, spec.size, (spec.intensity_low, spec.intensity_high))
    counts_op = BlurOperator(gaussian_psf(spec.psf_size, spec.psf_sigma), spec.size)
    data = simulate_data(x_true, counts_op, spec.i_max, spec.background, spec.seed)
    return _assemble(spec, x_true, data.g, data.scale)


def write_problem(spec: Experiment, data: ProblemData, directory) -> Path:
    directory = Path(directory)
    write_imgf64(directory / 'x_true.imgf64', data.x_true)
    write_imgf64(directory / 'g.imgf64', data.g)
    write_pgm(directory / 'x_true.pgm', data.x_true)
    write_pgm(directory / 'g.pgm', data.g)

    manifest = configparser.ConfigParser(interpolation=None)
    manifest['problem'] = {key: repr(value) if isinstance(value, float) else str(value)
                           for key, value in ((key, getattr(spec, key)) for key in PROBLEM_KEYS)}
    manifest['derived'] = {
        'scale': repr(data.scale),
        'model_background': repr(data.op.background),
        'generator': 'PCG64',
        'pipeline': 'g = Poisson(H(scale * x_true) + background) / scale',
    }
    buffer = io.StringIO()
    manifest.write(buffer)
    atomic_write(directory / 'manifest', buffer.getvalue().encode())
    return directory


def read_manifest(directory) -> dict:
    manifest = configparser.ConfigParser(interpolation=None)
    manifest.read_string((Path(directory) / 'manifest').read_text())
    return {section: dict(manifest.items(section)) for section in manifest.sections()}


def load_problem(spec: Experiment, directory) -> ProblemData:
    """
    ProblemData from a directory written by write_problem. The problem
    fields of ``spec`` must already match the manifest.
    """
    directory = Path(directory)
    scale = float(read_manifest(directory)['derived']['scale'])
    return _assemble(spec, read_imgf64(directory / 'x_true.imgf64'), read_imgf64(directory / 'g.imgf64'), scale)


# Reference solutions.

class ReferenceSolution(NamedTuple):
    x_star: np.ndarray
    f_star: float
    change: float
    cached: bool = False


def reference_method():
    """
    (method, schedule) of the reference run, from DEBLUR_REFERENCE_METHOD
    and that method's phantom preset.
    """
    method = settings.DEBLUR_REFERENCE_METHOD
    return method, preset_schedule('phantom', method)


def spec_hash(spec: Experiment, budget: int) -> str:
    method, schedule = reference_method()
    key = {name: getattr(spec, name) for name in PROBLEM_KEYS}
    key.update(budget=budget, method=method, schedule=schedule.as_tuple())
    return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]


def last_decade_change(f_values):
    """
    Relative decrease of the best f over the last tenth of the run.
    """
    k = len(f_values) - 1
    if k < 10:
        return math.inf
    best = np.minimum.accumulate(f_values)
    f_end, f_prev = best[-1], best[k - k // 10]
    return float(abs(f_prev - f_end) / max(abs(f_end), np.finfo(float).tiny))


def _check_converged(change, tolerance, budget):
    if change > tolerance:
        logger.error('Reference run not converged: last-decade relative f change %.3g > %.3g', change, tolerance)
        raise ConvergenceError(change, tolerance, budget)


def reference_solution(spec: Experiment, data: Optional[ProblemData] = None, cache_dir=None, budget=None,
                       tolerance=None) -> ReferenceSolution:
    """
    High-budget run giving (x*, f*), cached on disk under
    ``<cache>/<hash>/xstar.imgf64`` and ``meta``.

    x* is the best iterate of the run. Raises ConvergenceError, and caches
    nothing, when the best f still moved by more than ``tolerance``
    (default DEBLUR_REFERENCE_TOLERANCE) over the last decade.
    """
    budget = budget or spec.reference_iter
    tolerance = settings.DEBLUR_REFERENCE_TOLERANCE if tolerance is None else tolerance
    entry = Path(cache_dir or settings.DEBLUR_CACHE_DIR) / spec_hash(spec, budget)
    x_file, meta_file = entry / 'xstar.imgf64', entry / 'meta'
    if x_file.exists() and meta_file.exists():
        meta = dict(line.split(' = ', 1) for line in meta_file.read_text().splitlines() if ' = ' in line)
        logger.info('Reference cache hit %s', entry.name)
        change = float(meta.get('last_decade_change', 'inf'))
        _check_converged(change, tolerance, budget)
        return ReferenceSolution(read_imgf64(x_file), float(meta['f_star']), change, cached=True)

    data = data or build_problem(spec)
    method, schedule = reference_method()
    logger.info('Computing %s reference solution (%d iterations) into %s', method, budget, entry)
    best = {'f': math.inf, 'x': None}

    def keep_best(info):
        if info.f < best['f']:
            best.update(f=info.f, x=info.x)

    result = run_method(data.problem, method, schedule, max_iter=budget, log_every=max(budget // 20, 1),
                        callback=keep_best)
    f_values = result.trace.column('f')
    if f_values[-1] <= best['f']:
        best.update(f=float(f_values[-1]), x=result.x)
    change = last_decade_change(f_values)
    _check_converged(change, tolerance, budget)

    f_star = float(best['f'])
    write_imgf64(x_file, best['x'])
    meta = [f'f_star = {f_star!r}', f'iterations = {budget}', f'last_decade_change = {change!r}',
            f'method = {method}', f'schedule = {",".join(repr(t) for t in schedule.as_tuple())}']
    meta += [f'{key} = {getattr(spec, key)}' for key in PROBLEM_KEYS]
    atomic_write(meta_file, ('\n'.join(meta) + '\n').encode())
    return ReferenceSolution(best['x'], f_star, change)


# Metrics.

class Metrics(NamedTuple):
    e: float
    f_rel: float
    absolute: bool = False


def relative_error(x_k, x_star):
    norm_star = float(np.linalg.norm(x_star))
    e = float(np.linalg.norm(np.asarray(x_k) - x_star))
    if norm_star > 0:
        return e / norm_star, False
    return e, True


def relative_gap(f_k_val, f_star):
    if f_star != 0:
        return (f_k_val - f_star) / f_star, False
    return f_k_val - f_star, True


def metrics(x_k, f_k_val, x_star, f_star) -> Metrics:
    """
    e = |x - x*| / |x*| and f = (f(x) - f*) / f*. Falls back to the
    absolute differences, flagged, when |x*| or f* is zero.
    """
    e, e_absolute = relative_error(x_k, x_star)
    f_rel, f_absolute = relative_gap(f_k_val, f_star)
    return Metrics(e, float(f_rel), e_absolute or f_absolute)


# Runs.

@dataclass
class ExperimentResult:
    spec: Experiment
    rows: list
    summary: dict
    x: Optional[np.ndarray] = None
    csv_path: Optional[Path] = None
    plot_path: Optional[Path] = None
    error: Optional[Exception] = field(default=None, repr=False)


def output_dir_for(spec: Experiment, output_dir=None) -> Path:
    if output_dir:
        return Path(output_dir)
    if spec.output_dir:
        return Path(spec.output_dir)
    return Path(settings.DEBLUR_OUTPUT_DIR) / slugify(spec.name)


def trace_rows(trace, errors: dict, reference: ReferenceSolution):
    _, absolute = relative_error(reference.x_star, reference.x_star)
    rows = []
    for record in trace:
        e_k = errors.get(record.k)
        f_k, flagged = relative_gap(record.f, reference.f_star)
        absolute = absolute or flagged
        rows.append({
            'k': record.k, 'time_s': record.time_s, 'f': record.f, 'e_k': e_k, 'f_k': f_k,
            'alpha_k': record.alpha, 'eps_k': record.eps, 'delta_l': record.delta, 'u_norm': record.u_norm,
        })
    return rows, absolute


def summarize(rows) -> dict:
    """
    Final values and time-to-threshold on e_k, from the trace rows alone.
    """
    if not rows:
        return dict.fromkeys(['iterations', 'final_f', 'final_e', 'final_f_rel',
                              *(f'{prefix}_e_{tag}' for tag in THRESHOLDS for prefix in ('k', 'time'))])
    last = rows[-1]
    summary = {'iterations': last['k'], 'final_f': last['f'], 'final_e': last['e_k'], 'final_f_rel': last['f_k']}
    for tag, threshold in THRESHOLDS.items():
        hit = next((row for row in rows if row['e_k'] is not None and row['e_k'] <= threshold), None)
        summary[f'k_e_{tag}'] = hit['k'] if hit else None
        summary[f'time_e_{tag}'] = hit['time_s'] if hit else None
    return summary


def write_csv(rows, path) -> Path:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for row in rows:
        writer.writerow({key: '' if row[key] is None else (repr(row[key]) if isinstance(row[key], float) else row[key])
                         for key in CSV_COLUMNS})
    atomic_write(path, buffer.getvalue().encode())
    return Path(path)


def read_csv(path):
    with open(path, newline='') as handle:
        return [
            {key: None if value == '' else (int(value) if key == 'k' else float(value)) for key, value in row.items()}
            for row in csv.DictReader(handle)
        ]


def run_experiment(spec: Experiment, reference: Optional[ReferenceSolution] = None, data: Optional[ProblemData] = None,
                   output_dir=None, cache_dir=None, plot=None) -> ExperimentResult:
    """
    Run one method, write ``<name>-<method>.csv`` (and an SVG plot when
    asked) and return the rows with their summary. A diverged run is
    written out too; the DivergenceError is re-raised carrying ``result``.
    """
    data = data or build_problem(spec)
    reference = reference or reference_solution(spec, data, cache_dir)
    errors = {}

    def track(info):
        errors[info.k], _ = relative_error(info.x, reference.x_star)

    divergence, x_final = None, None
    try:
        result = run_method(data.problem, spec.method, spec.schedule, max_iter=spec.max_iter, delta0=spec.delta0,
                            B=spec.path_bound, nu1=spec.nu1, nu2=spec.nu2, rho_max=spec.rho_max, callback=track)
        trace, x_final = result.trace, result.x
        errors[trace[-1].k], _ = relative_error(x_final, reference.x_star)
    except DivergenceError as exc:
        divergence, trace = exc, exc.trace

    rows, absolute = trace_rows(trace, errors, reference)
    summary = summarize(rows)
    summary.update(f_star=reference.f_star, diverged_at=trace.diverged_at, absolute_metrics=absolute,
                   rel_error_true=rel_distance(x_final, data.x_true) if x_final is not None else None)
    summary['level_updates'] = max((r.level for r in trace if r.level is not None), default=None)

    directory = output_dir_for(spec, output_dir)
    label = f'{slugify(spec.name)}-{spec.method}'
    outcome = ExperimentResult(spec, rows, summary, x_final, write_csv(rows, directory / f'{label}.csv'))
    if spec.plot if plot is None else plot:
        outcome.plot_path = plot_traces({spec.method: rows}, directory / f'{label}.svg', title=spec.name)
    logger.info('%s: %d iterations, final e=%s', label, summary['iterations'], summary['final_e'])

    if divergence is not None:
        outcome.error = divergence
        divergence.result = outcome
        raise divergence
    return outcome


def run_batch(specs, jobs=1, reference=None, data=None, output_dir=None, cache_dir=None, plot=None):
    """
    Run several experiments, at most ``jobs`` at a time. Failures are
    returned in ExperimentResult.error instead of raised.
    """
    def run_one(spec):
        try:
            return run_experiment(spec, reference, data, output_dir, cache_dir, plot)
        except DivergenceError as exc:
            return exc.result
        except Exception as exc:
            logger.exception('Experiment %s (%s) failed', spec.name, spec.method)
            return ExperimentResult(spec, [], {}, error=exc)

    if jobs <= 1:
        return [run_one(spec) for spec in specs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_one, specs))


def make_variants(spec: Experiment, key, values):
    """
    Copies of ``spec`` with ``key`` set to each value, validated again.

    Method variants keep the name. With a preset each method picks up its
    own published row; otherwise level methods drop the alpha schedule and
    schedule methods drop the level settings and
    fall back to the default alpha schedule.
    """
    variants = []
    for value in values:
        data = {name: v for name, v in spec.spec_dict().items() if v not in (None, '')}
        data[key] = value
        if key == 'method':
            level = METHODS[value][0] == MODE_SSL if value in METHODS else False
            if spec.preset:
                for name in SCHEDULE_KEYS:
                    data.pop(name, None)
            elif level:
                data.update(t3=0.0, t4=0.0)
            if not level:
                data.pop('delta0', None)
                data.pop('path_bound', None)
                if not spec.preset and spec.is_level_method:
                    data.pop('t3', None)
                    data.pop('t4', None)
        else:
            data['name'] = f'{spec.name}-{key}-{value}'
        serializer = ExperimentConfigSerializer(data=data)
        serializer.is_valid(raise_exception=True)
        variants.append(serializer.build())
    return variants


def sweep(spec: Experiment, key, values, jobs=1, output_dir=None, cache_dir=None):
    """
    Run ``spec`` once per value of ``key``. Each row carries the final f,
    e_k and the relative distance to x_true (the criterion for picking beta).
    """
    variants = make_variants(spec, key, values)
    results = run_batch(variants, jobs=jobs, output_dir=output_dir, cache_dir=cache_dir, plot=False)
    rows = []
    for value, result in zip(values, results):
        summary = result.summary
        rows.append({
            key: value,
            'status': 'diverged' if isinstance(result.error, DivergenceError) else ('failed' if result.error else 'complete'),
            'iterations': summary.get('iterations'),
            'final_f': summary.get('final_f'),
            'final_e': summary.get('final_e'),
            'rel_error_true': summary.get('rel_error_true'),
        })
    return rows, results


# Persistence.

def status_of(result: ExperimentResult):
    if result.error is None:
        return Experiment.STATUS_COMPLETE
    if isinstance(result.error, DivergenceError):
        return Experiment.STATUS_DIVERGED
    return Experiment.STATUS_FAILED


@transaction.atomic
def persist(result: ExperimentResult) -> Experiment:
    experiment = copy.copy(result.spec)
    experiment.status = status_of(result)
    for key, value in result.summary.items():
        setattr(experiment, key, value)
    experiment.csv_path = str(result.csv_path or '')
    experiment.save()
    TraceRecord.objects.bulk_create(TraceRecord(experiment=experiment, **row) for row in result.rows)
    return experiment
