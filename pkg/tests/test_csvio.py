import numpy as np
import pytest

from qkin import csvio, sim
from qkin.discretize import NoiseSpec
from qkin.sim import TrajectorySpec


@pytest.fixture
def truth():
    return sim.generate_truth(TrajectorySpec(family="sinusoid_varying_axis", duration=2.0))


def test_imu_round_trip_is_lossless(tmp_path, truth):
    samples = sim.synthesize_imu(truth, NoiseSpec(0.05, 0.005, 1e-3, 1e-4), seed=1)
    path = tmp_path / "imu.csv"
    csvio.write_imu(path, samples, {"seed": 1})
    back = csvio.read_imu(path)
    assert len(back) == len(samples)
    for a, b in zip(samples, back):
        assert a.t == b.t
        np.testing.assert_array_equal(a.acc, b.acc)
        np.testing.assert_array_equal(a.gyro, b.gyro)
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=1"
    assert lines[1] == "t,ax,ay,az,wx,wy,wz"


def test_truth_round_trip(tmp_path, truth):
    path = tmp_path / "truth.csv"
    csvio.write_truth(path, truth)
    back = csvio.read_truth(path)
    np.testing.assert_array_equal(back.p, truth.p)
    np.testing.assert_array_equal(back.q, truth.q)
    assert path.read_text().splitlines()[0] == "t,px,py,pz,vx,vy,vz,qw,qx,qy,qz"


def test_fix_sigma_comes_from_header(tmp_path, truth):
    fixes = sim.synthesize_fixes(truth, 0.3, 1.0, seed=2)
    path = tmp_path / "fixes.csv"
    csvio.write_fixes(path, fixes, {"sigma_fix": 0.3})
    back = csvio.read_fixes(path, sigma=9.0)
    assert [f.sigma for f in back] == [0.3] * len(fixes)
    csvio.write_fixes(path, fixes)
    assert csvio.read_fixes(path, sigma=9.0)[0].sigma == 9.0


def test_seventeen_significant_digits():
    assert csvio.fmt(0.1) == "0.10000000000000001"
    assert float(csvio.fmt(np.pi)) == np.pi


@pytest.mark.parametrize(
    "header, column",
    [
        ("t,ax,ay,az,wx,wy", "wz"),
        ("t,ax,ay,accz,wx,wy,wz", "az"),
        ("t,ax,ay,az,wx,wy,wz,extra", "extra"),
    ],
)
def test_schema_mismatch_names_the_column(tmp_path, header, column):
    path = tmp_path / "imu.csv"
    path.write_text(header + "\n")
    with pytest.raises(csvio.SchemaError) as info:
        csvio.read_imu(path)
    assert info.value.column == column
    assert column in str(info.value)


def test_bad_row_is_a_schema_error(tmp_path):
    path = tmp_path / "imu.csv"
    path.write_text("t,ax,ay,az,wx,wy,wz\n0,1,2,3,4,5\n")
    with pytest.raises(csvio.SchemaError):
        csvio.read_imu(path)
    path.write_text("t,ax,ay,az,wx,wy,wz\n0,1,2,3,4,5,x\n")
    with pytest.raises(csvio.SchemaError):
        csvio.read_imu(path)
