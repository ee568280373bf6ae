import numpy as np
import pytest

from greytensors.digitizer import ConfigOffsets, GreyImage, Lattice
from greytensors.estimators import weights
from greytensors.estimators.exceptions import InvalidWeightException
from greytensors.estimators.weights import WeightSpec, check_window, local_sum, tree_sum
from greytensors.exceptions import WindowTooSmallException
from greytensors.psf import make_psf
from greytensors.types import PsfKind

SINGLE = ConfigOffsets.single(2)


def ones(values, positions):
    return np.ones((values.shape[0], 1))


def first_coordinate(values, positions):
    return positions[:, :1]


@pytest.fixture
def image():
    values = np.zeros((6, 6))
    values[2:4, 1:5] = 1.0
    values[1, 2] = 0.4
    return GreyImage(Lattice.standard(2, 0.5), ((0, 6), (0, 6)), values)


@pytest.mark.parametrize(
    "box, n_components",
    [
        ([[0.1, 0.9], [0.1, 0.9]], 1),
        ([[0.9, 0.1]], 1),
        ([[-0.1, 0.5]], 1),
        ([[0.5, 1.2]], 1),
        ([[0.1, 0.9]], 0),
    ],
)
def test_invalid_weights(box, n_components):
    with pytest.raises(InvalidWeightException):
        WeightSpec(SINGLE, box, 2, ones, n_components=n_components)


def test_levels():
    spec = WeightSpec(SINGLE, [[0.1, 0.9]], 2, ones, breaks=(0.5, 0.1))
    assert spec.levels() == (0.1, 0.5, 0.9)
    assert spec.breaks == (0.1, 0.5)
    assert WeightSpec(SINGLE, [[0.0, 1.0]], 2, ones).levels() == ()


def test_evaluate_is_zero_outside_box():
    spec = WeightSpec(SINGLE, [[0.2, 0.8]], 2, ones)
    result = spec.evaluate(np.array([0.1, 0.5, 0.8, 0.9]), np.zeros((4, 2)))
    assert result.shape == (4, 1)
    assert result[:, 0].tolist() == [0.0, 1.0, 1.0, 0.0]


def test_with_offsets_keeps_weight():
    spec = WeightSpec(SINGLE, [[0.2, 0.8]], 1, ones, metadata={"kind": "test"})
    moved = spec.with_offsets(ConfigOffsets([[1, 1]], n=2))
    assert moved.q == 1
    assert moved.box.tolist() == spec.box.tolist()
    assert moved.metadata == {"kind": "test"}
    assert moved.offsets.offsets.tolist() == [[1, 1]]


def test_box_is_read_only():
    spec = WeightSpec(SINGLE, [[0.2, 0.8]], 2, ones)
    with pytest.raises(ValueError):
        spec.box[0, 0] = 0.0


def test_tree_sum():
    assert tree_sum([], 2).tolist() == [0.0, 0.0]
    parts = [np.array([float(i)]) for i in range(7)]
    assert tree_sum(parts, 1).tolist() == [21.0]


def test_local_sum_counts_admissible_pixels(image):
    spec = WeightSpec(SINGLE, [[0.5, 1.0]], 2, ones)
    assert local_sum(image, spec).tolist() == pytest.approx([0.25 * 8])
    assert local_sum(image, spec, factor=1.0).tolist() == pytest.approx([8.0])


def test_local_sum_passes_positions(image):
    spec = WeightSpec(SINGLE, [[0.5, 1.0]], 0, first_coordinate)
    assert local_sum(image, spec).tolist() == pytest.approx([4 * (1.0 + 1.5)])


def test_local_sum_does_not_depend_on_tiling(image, monkeypatch):
    spec = WeightSpec(SINGLE, [[0.3, 1.0]], 2, first_coordinate)
    expected = local_sum(image, spec)
    monkeypatch.setattr(weights, "TILE_SIZE", 5)
    assert local_sum(image, spec).tolist() == pytest.approx(expected.tolist())


def test_support_at_border_is_rejected(image):
    spec = WeightSpec(SINGLE, [[0.0, 1.0]], 2, ones)
    with pytest.raises(WindowTooSmallException):
        local_sum(image, spec)
    assert local_sum(image, spec, check=False).tolist() == pytest.approx([0.25 * 36])


def test_check_window_only_looks_at_ring():
    values = np.zeros((4, 4, 1))
    values[1:3, 1:3] = 1.0
    spec = WeightSpec(SINGLE, [[0.5, 1.0]], 2, ones)
    check_window(values, spec)
    values[0, 3] = 1.0
    with pytest.raises(WindowTooSmallException):
        check_window(values, spec)


def test_regular_box_endpoints():
    spec = WeightSpec(SINGLE, [[0.1, 0.9]], 2, ones)
    spec.check_regular(make_psf({"kind": PsfKind.GAUSSIAN, "dim": 2}).profile)
