import math
import numpy as np
import pytest
from bench.harness import (
    CSV_COLUMNS, build_problem, last_decade_change, load_problem, make_variants, metrics, persist, read_csv,
    read_manifest, reference_method, reference_solution, run_batch, run_experiment, spec_hash, summarize, sweep,
    write_csv, write_problem
)
from bench.models import Experiment, TraceRecord
from optim.exceptions import ConvergenceError, DivergenceError
from optim.spdhg import run_method


def row(k, e_k, time_s=None):
    return {'k': k, 'time_s': float(k) if time_s is None else time_s, 'f': 1.0, 'e_k': e_k, 'f_k': 0.5,
            'alpha_k': None, 'eps_k': None, 'delta_l': None, 'u_norm': None}


@pytest.fixture
def small_reference(make_spec, tmp_path):
    spec = make_spec()
    data = build_problem(spec)
    return spec, data, reference_solution(spec, data, cache_dir=tmp_path / 'cache')


class TestMetrics:

    def test_if_at_optimum_both_are_zero(self, rng):
        x = rng.uniform(1, 5, (4, 4))

        assert metrics(x, 3.0, x, 3.0) == (0.0, 0.0, False)

    def test_if_twice_the_optimum_gap_is_one(self, rng):
        x = rng.uniform(1, 5, (4, 4))

        assert metrics(x, 6.0, x, 3.0).f_rel == pytest.approx(1.0)

    def test_matches_hand_formula(self):
        result = metrics(np.array([3.0, 4.0]), 2.5, np.array([0.0, 8.0]), 2.0)

        assert result.e == pytest.approx(5.0 / 8.0)
        assert result.f_rel == pytest.approx(0.25)

    def test_if_zero_optimum_falls_back_to_absolute(self):
        result = metrics(np.array([3.0, 4.0]), 0.5, np.zeros(2), 0.0)

        assert result == (5.0, 0.5, True)


class TestSummarize:

    def test_time_to_threshold(self):
        rows = [row(0, 1.0), row(1, 0.05), row(2, 0.009, 2.5), row(3, 0.002), row(4, 0.0009, 4.5)]

        summary = summarize(rows)

        assert summary['iterations'] == 4
        assert summary['final_e'] == 0.0009
        assert (summary['k_e_1e2'], summary['time_e_1e2']) == (2, 2.5)
        assert (summary['k_e_1e3'], summary['time_e_1e3']) == (4, 4.5)

    def test_if_threshold_never_reached(self):
        summary = summarize([row(0, 1.0), row(1, 0.5)])

        assert summary['k_e_1e2'] is None
        assert summary['time_e_1e3'] is None

    def test_if_truncation_keeps_earlier_hits(self):
        rows = [row(k, 10.0 ** -(k / 2)) for k in range(10)]
        full = summarize(rows)

        for m in range(1, len(rows) + 1):
            partial = summarize(rows[:m])
            assert partial['k_e_1e2'] in (None, full['k_e_1e2'])
            if partial['k_e_1e2'] is None:
                assert full['k_e_1e2'] is None or full['k_e_1e2'] >= m


class TestCsv:

    def test_header_and_empty_fields(self, tmp_path):
        path = write_csv([row(0, None)], tmp_path / 'trace.csv')
        lines = path.read_text().splitlines()

        assert lines[0] == ','.join(CSV_COLUMNS)
        assert lines[1] == '0,0.0,1.0,,0.5,,,,'

    def test_values_read_back(self, tmp_path):
        rows = [row(0, 1.0), row(1, 1.0 / 3.0)]

        assert read_csv(write_csv(rows, tmp_path / 'trace.csv')) == rows


class TestProblems:

    def test_if_same_spec_gives_same_data(self, make_spec):
        first, second = build_problem(make_spec()), build_problem(make_spec())

        assert np.array_equal(first.g, second.g)
        assert first.scale == second.scale == pytest.approx(0.5)
        assert first.op.background == pytest.approx(20.0)

    def test_written_problem_loads_back(self, make_spec, tmp_path):
        spec = make_spec()
        data = build_problem(spec)
        write_problem(spec, data, tmp_path / 'problem')
        loaded = load_problem(spec, tmp_path / 'problem')
        manifest = read_manifest(tmp_path / 'problem')

        assert np.array_equal(loaded.g, data.g)
        assert np.array_equal(loaded.x_true, data.x_true)
        assert loaded.op.background == data.op.background
        assert manifest['problem']['seed'] == '3'
        assert manifest['derived']['generator'] == 'PCG64'
        assert {p.name for p in (tmp_path / 'problem').iterdir()} == {
            'x_true.imgf64', 'g.imgf64', 'x_true.pgm', 'g.pgm', 'manifest'}


class TestReferenceSolution:

    def test_if_exact_fit_gives_data(self, make_spec, settings, tmp_path):
        settings.DEBLUR_REFERENCE_METHOD = 'PDHG'
        spec = make_spec(beta=0.0, background=0.0, psf_size=1, i_max=1000.0, intensity_low=50.0, reference_iter=50)
        data = build_problem(spec)

        reference = reference_solution(spec, data, cache_dir=tmp_path)

        assert np.allclose(reference.x_star, data.g, rtol=1e-9)
        assert reference.f_star == pytest.approx(0.0, abs=1e-8)

    def test_if_repeated_call_hits_the_cache(self, small_reference, tmp_path):
        spec, data, first = small_reference
        second = reference_solution(spec, data, cache_dir=tmp_path / 'cache')
        entry = tmp_path / 'cache' / spec_hash(spec, spec.reference_iter)

        assert not first.cached
        assert second.cached
        assert second.f_star == first.f_star
        assert np.array_equal(second.x_star, first.x_star)
        assert (entry / 'xstar.imgf64').exists()
        assert 'f_star = ' in (entry / 'meta').read_text()
        assert 'method = SSL' in (entry / 'meta').read_text()

    def test_reference_is_the_best_iterate(self, small_reference):
        spec, data, reference = small_reference
        trace = run_method(data.problem, *reference_method(), max_iter=spec.reference_iter, log_every=0).trace

        assert reference.f_star == trace.column('f').min()
        assert data.problem.objective(reference.x_star) == pytest.approx(reference.f_star, rel=1e-12)

    def test_if_settings_change_the_hash(self, make_spec, settings):
        spec = make_spec()
        ssl_hash = spec_hash(spec, 100)

        assert ssl_hash == spec_hash(make_spec(), 100)
        assert ssl_hash != spec_hash(spec, 200)
        assert ssl_hash != spec_hash(make_spec(beta=0.1), 100)
        settings.DEBLUR_REFERENCE_METHOD = 'PDHG'
        assert ssl_hash != spec_hash(spec, 100)

    def test_if_short_budget_raises(self, make_spec, settings, tmp_path):
        settings.DEBLUR_REFERENCE_TOLERANCE = 1e-8
        spec = make_spec(reference_iter=5)

        with pytest.raises(ConvergenceError) as exc_info:
            reference_solution(spec, cache_dir=tmp_path)

        assert exc_info.value.iterations == 5
        assert not (tmp_path / spec_hash(spec, 5)).exists()

    def test_if_cached_reference_misses_a_tighter_tolerance_it_raises(self, make_spec, tmp_path):
        spec = make_spec(reference_iter=5)
        first = reference_solution(spec, cache_dir=tmp_path)

        with pytest.raises(ConvergenceError):
            reference_solution(spec, cache_dir=tmp_path, tolerance=1.0)

        assert first.change == math.inf
        assert (tmp_path / spec_hash(spec, 5) / 'meta').exists()

    @pytest.mark.parametrize('f_values, expected', [
        ([5.0] * 5, math.inf),
        ([10.0] * 11, 0.0),
        ([10.0] * 10 + [8.0], 0.25),
        ([10.0, 4.0] + [6.0] * 9, 0.0),
    ])
    def test_last_decade_change_uses_the_best_value(self, f_values, expected):
        assert last_decade_change(np.array(f_values)) == expected

    def test_uses_default_cache_directory(self, make_spec, settings):
        spec = make_spec(reference_iter=20)

        reference_solution(spec)

        assert (settings.DEBLUR_CACHE_DIR / spec_hash(spec, 20) / 'meta').exists()


class TestRunExperiment:

    def test_writes_trace_and_summary(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        result = run_experiment(spec, reference, data, output_dir=tmp_path / 'out')

        assert result.csv_path == tmp_path / 'out' / 'small-SPDHG.csv'
        assert read_csv(result.csv_path) == result.rows
        assert [r['k'] for r in result.rows] == list(range(21))
        assert result.summary['iterations'] == 20
        assert result.summary['f_star'] == reference.f_star
        assert result.summary['final_e'] == result.rows[-1]['e_k']
        assert result.summary['level_updates'] is None
        assert result.plot_path is None

    def test_if_zero_budget_keeps_only_the_start(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference
        result = run_experiment(make_spec(max_iter=0), reference, data, output_dir=tmp_path)

        assert len(result.rows) == 1
        assert result.rows[0]['k'] == 0
        assert result.rows[0]['alpha_k'] is None

    def test_times_are_nondecreasing(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        times = [r['time_s'] for r in run_experiment(spec, reference, data, output_dir=tmp_path).rows]

        assert times == sorted(times)

    def test_level_run_records_delta(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference
        result = run_experiment(make_spec(method='SSL', max_iter=50), reference, data, output_dir=tmp_path)
        delta = [r['delta_l'] for r in result.rows]

        assert all(d is not None for d in delta)
        assert all(a >= b for a, b in zip(delta, delta[1:]))
        assert result.summary['level_updates'] is not None

    def test_methods_share_the_reference(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference
        pdhg = run_experiment(make_spec(method='PDHG'), reference, data, output_dir=tmp_path)
        spdhg = run_experiment(make_spec(method='SPDHG'), reference, data, output_dir=tmp_path)

        assert pdhg.summary['f_star'] == spdhg.summary['f_star']
        assert pdhg.csv_path != spdhg.csv_path
        assert pdhg.rows[0]['e_k'] == spdhg.rows[0]['e_k']

    def test_rerun_reproduces_the_trace(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        first = run_experiment(spec, reference, data, output_dir=tmp_path / 'a')
        second = run_experiment(spec, reference, data, output_dir=tmp_path / 'b')
        strip = lambda rows: [{key: value for key, value in r.items() if key != 'time_s'} for r in rows]

        assert strip(first.rows) == strip(second.rows)

    def test_plot_is_written_when_asked(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        result = run_experiment(spec, reference, data, output_dir=tmp_path, plot=True)

        assert result.plot_path == tmp_path / 'small-SPDHG.svg'
        assert result.plot_path.read_text().lstrip().startswith('<?xml')

    def test_if_divergence_writes_the_partial_trace(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference

        with pytest.raises(DivergenceError) as exc_info:
            run_experiment(make_spec(rho_max=1e-6), reference, data, output_dir=tmp_path)

        result = exc_info.value.result
        assert result.summary['diverged_at'] == 0
        assert result.rows == []
        assert result.csv_path.exists()

    def test_default_output_directory(self, small_reference, settings):
        spec, data, reference = small_reference
        result = run_experiment(spec, reference, data)

        assert result.csv_path == settings.DEBLUR_OUTPUT_DIR / 'small' / 'small-SPDHG.csv'


class TestVariants:

    def test_preset_methods_take_their_own_rows(self, make_spec):
        variants = make_variants(make_spec(preset='micro', method='PDHG'), 'method', ['PDHG', 'SPDHG', 'SL', 'SSL'])

        assert [v.method for v in variants] == ['PDHG', 'SPDHG', 'SL', 'SSL']
        assert variants[1].schedule.as_tuple() == (0.4, 1e-5, 0.4, 1e-5, 1e13, 1.0)
        assert variants[3].schedule.as_tuple() == (0.9, 1e-2, 0.0, 0.0, 1e13, 1.0)

    def test_level_variants_drop_alpha(self, make_spec):
        variants = make_variants(make_spec(method='SSL', delta0=5.0), 'method', ['SL', 'PDHG'])

        assert (variants[0].t3, variants[0].delta0) == (0.0, 5.0)
        assert variants[1].delta0 is None

    def test_other_keys_rename_the_variant(self, make_spec):
        variants = make_variants(make_spec(), 'beta', ['0.01', '0.1'])

        assert [v.beta for v in variants] == [0.01, 0.1]
        assert variants[0].name == 'small-beta-0.01'


class TestBatches:

    def test_parallel_batch_keeps_order(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference
        specs = [make_spec(method=method) for method in ('PDHG', 'SPDHG', 'SL', 'SSL')]

        results = run_batch(specs, jobs=2, reference=reference, data=data, output_dir=tmp_path)

        assert [r.spec.method for r in results] == ['PDHG', 'SPDHG', 'SL', 'SSL']
        assert all(r.error is None for r in results)
        assert len({r.csv_path for r in results}) == 4

    def test_if_divergence_is_returned_not_raised(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference

        results = run_batch([make_spec(rho_max=1e-6), make_spec()], reference=reference, data=data, output_dir=tmp_path)

        assert isinstance(results[0].error, DivergenceError)
        assert results[1].error is None

    def test_sweep_rows(self, make_spec, tmp_path):
        rows, results = sweep(make_spec(reference_iter=20), 'beta', ['0.01', '0.1'], output_dir=tmp_path,
                              cache_dir=tmp_path / 'cache')

        assert [r['beta'] for r in rows] == ['0.01', '0.1']
        assert all(r['status'] == 'complete' for r in rows)
        assert all(math.isfinite(r['rel_error_true']) for r in rows)
        assert len(results) == 2


@pytest.mark.django_db
class TestPersist:

    def test_completed_run_is_stored_with_records(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        result = run_experiment(spec, reference, data, output_dir=tmp_path)

        experiment = persist(result)

        assert experiment.status == Experiment.STATUS_COMPLETE
        assert experiment.slug == 'small'
        assert experiment.iterations == 20
        assert experiment.csv_path == str(result.csv_path)
        assert TraceRecord.objects.filter(experiment=experiment).count() == 21
        assert spec.pk is None

    def test_diverged_run_is_stored_as_diverged(self, make_spec, small_reference, tmp_path):
        _, data, reference = small_reference

        with pytest.raises(DivergenceError) as exc_info:
            run_experiment(make_spec(rho_max=1e-6), reference, data, output_dir=tmp_path)
        experiment = persist(exc_info.value.result)

        assert experiment.status == Experiment.STATUS_DIVERGED
        assert experiment.diverged_at == 0
        assert experiment.records.count() == 0

    def test_repeated_names_get_distinct_slugs(self, small_reference, tmp_path):
        spec, data, reference = small_reference
        result = run_experiment(spec, reference, data, output_dir=tmp_path)

        first, second = persist(result), persist(result)

        assert first.pk != second.pk
        assert first.slug != second.slug
