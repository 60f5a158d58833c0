import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rgbd360.depth_codec import (
    DepthMap16,
    PackedDepthImage,
    RgbImage,
    RgbdTensor,
    assemble_rgbd,
    pack_depth,
    split_rgbd,
    unpack_depth,
)
from rgbd360.errors import DimensionMismatch, NonZeroHighChannel

small_depth_maps = arrays(
    np.uint16,
    st.tuples(st.integers(1, 8), st.integers(1, 8)),
    elements=st.integers(0, 0xFFFF),
).map(DepthMap16)


def single_pixel(value):
    return DepthMap16(np.array([[value]], dtype=np.uint16))


class TestPackUnpack:
    def test_zero_map(self):
        packed = pack_depth(DepthMap16(np.zeros((3, 4), np.uint16)))
        assert not packed.channels.any()

    def test_documented_byte_layout(self):
        packed = pack_depth(single_pixel(0xABCD))
        assert tuple(packed.channels[0, 0]) == (0x00, 0xAB, 0xCD)

    def test_max_value(self):
        packed = pack_depth(single_pixel(0xFFFF))
        assert tuple(packed.channels[0, 0]) == (0, 255, 255)

    def test_high_channel_always_zero(self):
        packed = pack_depth(single_pixel(0xFFFF))
        assert not packed.channels[:, :, 0].any()

    def test_unpack_example(self):
        p = PackedDepthImage(np.array([[[0, 0xAB, 0xCD]]], np.uint8))
        assert unpack_depth(p).values[0, 0] == 0xABCD

    def test_unpack_zero(self):
        p = PackedDepthImage(np.zeros((2, 2, 3), np.uint8))
        assert not unpack_depth(p).values.any()

    def test_exhaustive_roundtrip(self):
        # all 65,536 values in one 256x256 grid
        every = DepthMap16(np.arange(65536, dtype=np.uint16).reshape(256, 256))
        assert np.array_equal(unpack_depth(pack_depth(every)).values, every.values)

    def test_injectivity(self):
        every = pack_depth(
            DepthMap16(np.arange(65536, dtype=np.uint16).reshape(256, 256))
        )
        triples = every.channels.reshape(-1, 3)
        assert len(np.unique(triples, axis=0)) == 65536

    def test_nonzero_high_channel_warns_not_raises(self):
        p = PackedDepthImage(np.array([[[1, 0, 5]]], np.uint8))
        with pytest.warns(NonZeroHighChannel):
            d = unpack_depth(p)
        assert d.values[0, 0] == 5

    @given(small_depth_maps)
    def test_roundtrip_property(self, d):
        assert np.array_equal(unpack_depth(pack_depth(d)).values, d.values)

    @given(
        arrays(
            np.uint8,
            st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3)),
            elements=st.integers(0, 255),
        )
    )
    def test_pack_unpack_bijection_on_16bit_subspace(self, channels):
        channels[:, :, 0] = 0
        p = PackedDepthImage(channels)
        assert np.array_equal(pack_depth(unpack_depth(p)).channels, p.channels)


class TestAssembleSplit:
    def test_white_rgb_zero_depth(self):
        rgb = RgbImage(np.full((2, 2, 3), 255, np.uint8))
        packed = PackedDepthImage(np.zeros((2, 2, 3), np.uint8))
        t = assemble_rgbd(rgb, packed)
        assert np.array_equal(t.data[:, :, :3], np.ones((2, 2, 3), np.float32))
        assert not t.data[:, :, 3:].any()

    def test_paper_sized_tensor_shape(self):
        rgb = RgbImage(np.zeros((512, 512, 3), np.uint8))
        packed = PackedDepthImage(np.zeros((512, 512, 3), np.uint8))
        assert assemble_rgbd(rgb, packed).data.shape == (512, 512, 6)

    def test_normalization_of_128(self):
        rgb = RgbImage(np.full((1, 1, 3), 128, np.uint8))
        packed = PackedDepthImage(np.full((1, 1, 3), 128, np.uint8))
        t = assemble_rgbd(rgb, packed)
        assert t.data == pytest.approx(128 / 255, abs=1e-7)

    def test_dimension_mismatch(self):
        rgb = RgbImage(np.zeros((2, 2, 3), np.uint8))
        packed = PackedDepthImage(np.zeros((2, 3, 3), np.uint8))
        with pytest.raises(DimensionMismatch):
            assemble_rgbd(rgb, packed)

    def test_all_ones_splits_to_saturated(self):
        t = RgbdTensor(np.ones((2, 2, 6), np.float32))
        with pytest.warns(NonZeroHighChannel):  # 24-bit high byte saturated
            rgb, depth = split_rgbd(t)
        assert (rgb.pixels == 255).all()
        assert (depth.values == 65535).all()

    def test_quantization_of_half(self):
        data = np.zeros((1, 1, 6), np.float32)
        data[:, :, :3] = 128 / 255
        rgb, _ = split_rgbd(RgbdTensor(data))
        assert (rgb.pixels == 128).all()

    def test_out_of_range_is_clamped(self):
        data = np.zeros((1, 1, 6), np.float32)
        data[0, 0] = [-0.5, 1.5, 0.25, 0.0, 0.0, 0.0]
        rgb, _ = split_rgbd(RgbdTensor(data))
        assert tuple(rgb.pixels[0, 0]) == (0, 255, 64)

    @given(st.data())
    @settings(max_examples=50)
    def test_assemble_split_identity(self, data):
        h = data.draw(st.integers(1, 6))
        w = data.draw(st.integers(1, 6))
        pixels = data.draw(arrays(np.uint8, (h, w, 3), elements=st.integers(0, 255)))
        values = data.draw(arrays(np.uint16, (h, w), elements=st.integers(0, 0xFFFF)))
        rgb = RgbImage(pixels)
        packed = pack_depth(DepthMap16(values))
        rgb2, depth2 = split_rgbd(assemble_rgbd(rgb, packed))
        assert np.array_equal(rgb2.pixels, rgb.pixels)
        assert np.array_equal(depth2.values, values)


class TestValidation:
    def test_empty_depth_rejected(self):
        with pytest.raises(ValueError):
            DepthMap16(np.zeros((0, 4), np.uint16))

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(ValueError):
            RgbdTensor(np.zeros((2, 2, 4), np.float32))
