"""Tests for utility functions."""
import csv
import tempfile
from pathlib import Path

import numpy as np
import pytest

from elastoborn.calculus import E1, Grid, ScalarField, SupportTag, VectorField, ray_antiderivative
from elastoborn.errors import FieldFormatError, SupportViolationError
from elastoborn.models import (
    BumpSpec,
    BumpsPerturbation,
    EliminationStepModel,
    FilesPerturbation,
    IsotropicPerturbation,
    KernelReportModel,
    KernelSampleModel,
    RandomPerturbation,
    ReplayReportModel,
    RunReport,
    Status,
)
from elastoborn.tensors import Perturbation
from elastoborn.utils import (
    bump,
    generate_perturbation,
    generate_summary_table,
    read_field,
    read_perturbation,
    read_report,
    read_vector_field,
    write_field,
    write_kernel_csv,
    write_perturbation,
    write_report,
    write_summary,
    write_vector_field,
)


def test_field_round_trip_is_bitwise(grid16, make_cap):
    """Test writing then reading a field keeps every bit and the support tag."""
    f = ray_antiderivative(make_cap(grid16), 1, 1)
    with tempfile.TemporaryDirectory() as temp_dir:
        path = write_field(f, Path(temp_dir) / 'g')
        assert path.name == 'g.f64'
        assert path.stat().st_size == 8 * 16**3
        g = read_field(path, grid16)
        assert np.array_equal(g.values, f.values)
        assert g.support_tag == SupportTag.UPSTREAM
        assert g.upstream == E1


def test_vector_field_files(grid16, make_cap):
    """Test vector fields are stored as three component files."""
    f = make_cap(grid16)
    V = VectorField((f, f * 2.0, f * 3.0))
    with tempfile.TemporaryDirectory() as temp_dir:
        paths = write_vector_field(V, Path(temp_dir) / 'ds.f64')
        assert [p.name for p in paths] == ['ds_x1.f64', 'ds_x2.f64', 'ds_x3.f64']
        W = read_vector_field(Path(temp_dir) / 'ds.f64', grid16)
        assert np.array_equal(W[2].values, V[2].values)


def test_truncated_field_file(grid16):
    """Test a data file with the wrong sample count is rejected."""
    with tempfile.TemporaryDirectory() as temp_dir:
        path = write_field(ScalarField.zeros(grid16), Path(temp_dir) / 'f')
        with open(path, 'wb') as fh:
            fh.write(np.zeros(100, dtype='<f8').tobytes())
        with pytest.raises(FieldFormatError):
            read_field(path)


def test_field_grid_mismatch(grid16):
    """Test reading against a different expected grid fails."""
    with tempfile.TemporaryDirectory() as temp_dir:
        path = write_field(ScalarField.zeros(grid16), Path(temp_dir) / 'f')
        with pytest.raises(FieldFormatError):
            read_field(path, Grid(N=32))


def test_missing_sidecar():
    """Test a field without its JSON sidecar is rejected."""
    with tempfile.TemporaryDirectory() as temp_dir:
        path = Path(temp_dir) / 'f.f64'
        path.write_bytes(np.zeros(16**3, dtype='<f8').tobytes())
        with pytest.raises(FieldFormatError):
            read_field(path)


def test_perturbation_bundle_round_trip(grid16, make_isotropic_triple):
    """Test the 22-file bundle plus lambda and mu for isotropic input."""
    P = Perturbation.from_isotropic(*make_isotropic_triple(grid16, 0))
    with tempfile.TemporaryDirectory() as temp_dir:
        write_perturbation(P, temp_dir, {'kind': 'test'})
        assert (Path(temp_dir) / 'c16.f64').exists()
        assert (Path(temp_dir) / 'lambda.f64').exists()
        Q = read_perturbation(temp_dir)
        assert Q.isotropic is not None
        for a, b in zip(P.parameters(), Q.parameters()):
            assert np.array_equal(a.values, b.values)

        loaded, metadata = generate_perturbation(FilesPerturbation(path=temp_dir), grid16)
        assert metadata['path'] == temp_dir
        assert np.array_equal(loaded.rho.values, P.rho.values)


def test_read_perturbation_needs_metadata():
    """Test a directory without metadata.json is not a bundle."""
    with tempfile.TemporaryDirectory() as temp_dir:
        with pytest.raises(FieldFormatError):
            read_perturbation(temp_dir)


def test_bump_closed_form(grid16):
    """Test the bump peaks at its center and vanishes outside its radius."""
    f = bump(grid16, BumpSpec(center=(0.0, 0.0, 0.0), radius=0.5, amplitude=2.0))
    assert f.support_tag == SupportTag.COMPACT
    assert f.values[8, 8, 8] == pytest.approx(2.0)
    assert not np.any(f.values[grid16.radius() >= 0.5])


def test_bump_support_violation(grid16):
    """Test a bump reaching past |x| = 0.95 is refused."""
    spec = BumpSpec.model_construct(center=(0.9, 0.0, 0.0), radius=0.5, amplitude=1.0)
    with pytest.raises(SupportViolationError):
        bump(grid16, spec)


def test_generate_random_perturbation_is_deterministic(grid16):
    """Test the same seed gives the same perturbation."""
    spec = RandomPerturbation(seed=3, bumps=1)
    P, metadata = generate_perturbation(spec, grid16)
    Q, _ = generate_perturbation(spec, grid16)
    assert metadata['prng'] == 'PCG64'
    assert metadata['seed'] == 3
    for a, b in zip(P.parameters(), Q.parameters()):
        assert np.array_equal(a.values, b.values)
    R, metadata = generate_perturbation(spec, grid16, seed=4)
    assert metadata['seed'] == 4
    assert not np.array_equal(R.rho.values, P.rho.values)


def test_generate_bumps_and_isotropic(grid16):
    """Test empty bump lists give zero and isotropic specs keep lambda and mu."""
    P, _ = generate_perturbation(BumpsPerturbation(), grid16)
    assert not any(f.values.any() for f in P.parameters())
    spec = IsotropicPerturbation(mu=[BumpSpec(radius=0.6)])
    Q, metadata = generate_perturbation(spec, grid16)
    assert metadata['kind'] == 'isotropic'
    assert Q.isotropic is not None
    assert np.array_equal(Q.C[(4, 4)].values, Q.isotropic[1].values)


def _kernel_report() -> tuple[KernelReportModel, list[ReplayReportModel]]:
    samples = [
        KernelSampleModel(xi=(0.6, 0.6, 0.53), sigma_min=0.12, rows=51),
        KernelSampleModel(xi=(0.3, -0.8, 0.52), sigma_min=0.08, rows=51),
    ]
    kernel = KernelReportModel(samples=samples, min_sigma=0.08, tolerance=1e-6, passed=True)
    step = EliminationStepModel(index=1, name='pp', families=['pp'], targets=['c11'], residuals=[1e-14, 3e-13], passed=True)
    replay = ReplayReportModel(xi=(0.6, 0.6, 0.53), steps=[step], tolerance=1e-8, passed=True)
    return kernel, [replay]


def test_write_kernel_csv():
    """Test one CSV row per sample with replay columns where a replay ran."""
    kernel, replays = _kernel_report()
    with tempfile.TemporaryDirectory() as temp_dir:
        path = write_kernel_csv(kernel, replays, Path(temp_dir) / 'kernel_certificate.csv')
        with open(path, newline='') as f:
            rows = list(csv.reader(f))
    assert rows[0] == ['xi1', 'xi2', 'xi3', 'sigma_min', 'rows', 'step1']
    assert len(rows) == 3
    assert float(rows[1][5]) == pytest.approx(3e-13)
    assert rows[2][5] == ''


def test_report_round_trip_and_summary():
    """Test report.json files feed the markdown summary table."""
    with tempfile.TemporaryDirectory() as temp_dir:
        write_report(RunReport(command='kernel-test', status=Status.PASS, message='min sigma 8.0e-02', elapsed_seconds=1.5), Path(temp_dir) / 'kernel')
        write_report(RunReport(command='stability', status=Status.FAIL), Path(temp_dir) / 'stability')

        report = read_report(Path(temp_dir) / 'kernel' / 'report.json')
        assert report.status == Status.PASS

        table = generate_summary_table(temp_dir)
        assert '| [kernel](kernel/report.json) | kernel-test | 🟢 PASS | min sigma 8.0e-02 | 1.5 |' in table
        assert '🔴 FAIL' in table

        summary = write_summary(temp_dir)
        assert summary.read_text().startswith('# elastoborn runs')


def test_summary_skips_unreadable_reports():
    """Test malformed report files are skipped."""
    with tempfile.TemporaryDirectory() as temp_dir:
        broken = Path(temp_dir) / 'broken'
        broken.mkdir()
        (broken / 'report.json').write_text('{not json')
        table = generate_summary_table(temp_dir)
        assert 'broken' not in table
