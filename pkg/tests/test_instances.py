"""
Tests for histotest.instances.
"""

import numpy as np
import pytest

from histotest.checks import check_zigzag_far
from histotest.config import ExperimentConfig
from histotest.dist_core import RngStream
from histotest.instances import (
    build_instance,
    certified_tv_lower_bound,
    random_khistogram,
    uniform,
    zigzag,
    zigzag_blocks,
)


class TestGenerators:
    """Tests for the instance generators."""

    def test_uniform(self):
        assert uniform(5).pieces == 1

    def test_random_khistogram_pieces(self):
        for seed in range(10):
            pmf = random_khistogram(100, 7, RngStream(seed))
            assert pmf.pieces == 7
            assert pmf.total == pytest.approx(1.0)

    def test_random_khistogram_range(self):
        with pytest.raises(ValueError):
            random_khistogram(5, 6, RngStream(0))

    def test_zigzag_levels(self):
        pmf = zigzag(8, 4)
        assert pmf.mass.tolist() == pytest.approx([0.25, 0.25, 0.0, 0.0, 0.25, 0.25, 0.0, 0.0])

    def test_zigzag_amplitude(self):
        pmf = zigzag(4, 2, amplitude=0.5)
        assert pmf.mass.tolist() == pytest.approx([0.375, 0.375, 0.125, 0.125])

    def test_zigzag_invalid(self):
        with pytest.raises(ValueError):
            zigzag(4, 5)
        with pytest.raises(ValueError):
            zigzag(4, 2, amplitude=0.0)

    def test_zigzag_blocks(self):
        assert zigzag_blocks(5, 0.25, 1000) == 40
        assert zigzag_blocks(5, 0.25, 30) == 30

    def test_zigzag_is_certified_far(self):
        """With 2 ceil(1/eps) k blocks the zigzag is eps-far from k pieces."""
        pmf = zigzag(1000, zigzag_blocks(5, 0.25, 1000))
        assert certified_tv_lower_bound(pmf, 5) >= 0.25
        passed, errors, _ = check_zigzag_far(pmf, 5, 0.25)
        assert passed, errors


class TestBuildInstance:
    """Tests for build_instance."""

    def test_uniform(self):
        instance = build_instance(ExperimentConfig(n=16), RngStream(0))
        assert instance.true_k == 1
        assert instance.describe()['instance'] == 'uniform'

    def test_random_khist(self):
        instance = build_instance(ExperimentConfig(n=50, k=4, instance='random-khist'), RngStream(0))
        assert instance.true_k == 4

    def test_zigzag(self):
        instance = build_instance(ExperimentConfig(n=1000, k=5, instance='zigzag'), RngStream(0))
        assert instance.descriptors['blocks'] == 40
        assert instance.certified_distance >= 0.25

    @pytest.mark.parametrize("name", ['hard-yes', 'hard-no'])
    def test_hard(self, name):
        instance = build_instance(ExperimentConfig(n=2048, k=8, eps=0.25, instance=name), RngStream(0))
        assert instance.pmf.total == pytest.approx(1.0)
        assert instance.descriptors['weight'] == 0.1

    def test_file(self, tmp_path):
        path = tmp_path / 'p.txt'
        path.write_text("1\n1\n2\n", encoding='utf-8')
        instance = build_instance(ExperimentConfig(n=1000, instance='file', instance_path=str(path)), RngStream(0))
        assert instance.pmf.n == 3
        assert instance.true_k == 2
        assert np.allclose(instance.pmf.mass, [0.25, 0.25, 0.5])
        assert instance.descriptors['raw_total'] == 4.0

    def test_file_zero_total(self, tmp_path):
        path = tmp_path / 'p.txt'
        path.write_text("0\n0\n", encoding='utf-8')
        config = ExperimentConfig(instance='file', instance_path=str(path))
        with pytest.raises(ValueError, match="zero"):
            build_instance(config, RngStream(0))

    def test_missing_file(self):
        config = ExperimentConfig(instance='file', instance_path='/nonexistent/p.txt')
        with pytest.raises(FileNotFoundError):
            build_instance(config, RngStream(0))
