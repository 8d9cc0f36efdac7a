"""Unit tests for the JSC encoder/decoder and the power layer."""

import pytest
import torch

from secsemcom.core.errors import PowerNormalizationError, ShapeMismatchError
from secsemcom.models.codec import (
    Decoder,
    Encoder,
    SubPixelUpsample,
    average_power,
    build_codec,
    decode,
    encode,
    power_normalize,
)
from secsemcom.schemas import CodecArchitecture, CodecConfig


class TestCodecConfig:
    """Tests for the derived codec quantities."""

    def test_reference_latent_size(self) -> None:
        config = CodecConfig()

        assert config.latent_shape == (8, 16, 16)
        assert config.latent_dim == 2048
        assert config.bandwidth_ratio == pytest.approx(1 / 24)

    def test_indivisible_input_rejected(self) -> None:
        with pytest.raises(ValueError, match="not divisible"):
            CodecConfig(input_shape=(100, 100, 3))


class TestCodecShapes:
    """Tests for encoder and decoder shapes."""

    def test_reference_architecture(self) -> None:
        config = CodecConfig()
        encoder, decoder = build_codec(config, init_seed=0)
        images = torch.rand(2, 3, 128, 128)

        with torch.no_grad():
            z = encode(images, encoder)
            reconstruction = decode(power_normalize(z), decoder)

        assert z.shape == (2, 2048)
        assert reconstruction.shape == (2, 3, 128, 128)

    @pytest.mark.parametrize(
        "architecture", [CodecArchitecture.RESIDUAL, CodecArchitecture.FULL_CONV]
    )
    def test_variants_share_shapes(
        self, tiny_codec_config: CodecConfig, architecture: CodecArchitecture
    ) -> None:
        config = tiny_codec_config.model_copy(update={"architecture": architecture})
        encoder, decoder = build_codec(config, init_seed=0)
        images = torch.rand(3, 3, 16, 16)

        with torch.no_grad():
            reconstruction = decoder(power_normalize(encoder(images)))

        assert encoder(images).shape == (3, 32)
        assert reconstruction.shape == images.shape
        assert float(reconstruction.min()) >= 0.0
        assert float(reconstruction.max()) <= 1.0

    def test_encoder_rejects_wrong_image_shape(self, tiny_codec_config: CodecConfig) -> None:
        encoder, _ = build_codec(tiny_codec_config, init_seed=0)

        with pytest.raises(ShapeMismatchError, match="encoder expects"):
            encoder(torch.rand(1, 3, 32, 32))

    def test_decoder_rejects_wrong_latent(self, tiny_codec_config: CodecConfig) -> None:
        _, decoder = build_codec(tiny_codec_config, init_seed=0)

        with pytest.raises(ShapeMismatchError, match="decoder expects"):
            decoder(torch.rand(1, 31))

    def test_subpixel_doubles_resolution(self) -> None:
        assert SubPixelUpsample(4)(torch.rand(1, 4, 5, 5)).shape == (1, 4, 10, 10)


class TestBuildCodec:
    """Tests for seeded construction."""

    def test_same_seed_same_parameters(self, tiny_codec_config: CodecConfig) -> None:
        first, _ = build_codec(tiny_codec_config, init_seed=11)
        second, _ = build_codec(tiny_codec_config, init_seed=11)

        for a, b in zip(first.parameters(), second.parameters()):
            assert torch.equal(a, b)

    def test_global_rng_untouched(self, tiny_codec_config: CodecConfig) -> None:
        torch.manual_seed(5)
        expected = torch.rand(3)
        torch.manual_seed(5)
        build_codec(tiny_codec_config, init_seed=1)

        assert torch.equal(torch.rand(3), expected)


class TestPowerNormalize:
    """Tests for the transmit power layer."""

    @pytest.mark.parametrize("p", [1.0, 2.5])
    def test_power_constraint_holds(self, p: float) -> None:
        generator = torch.Generator().manual_seed(0)
        scales = torch.logspace(-3, 3, 1000, dtype=torch.float64)[:, None]
        z = scales * torch.randn(1000, 64, generator=generator, dtype=torch.float64)

        x = power_normalize(z, p)

        assert float((average_power(x) - p).abs().max()) < 1e-6

    def test_float32_power(self) -> None:
        z = torch.randn(16, 2048, generator=torch.Generator().manual_seed(1))

        assert torch.allclose(average_power(power_normalize(z)), torch.ones(16), atol=1e-5)

    def test_direction_preserved(self) -> None:
        z = torch.tensor([[3.0, 4.0]], dtype=torch.float64)

        assert torch.allclose(power_normalize(z), torch.tensor([[0.6, 0.8]]).double() * 2**0.5)

    def test_zero_latent_rejected(self) -> None:
        z = torch.ones(3, 8)
        z[1] = 0.0

        with pytest.raises(PowerNormalizationError, match="zero-power latent"):
            power_normalize(z)

    def test_invalid_arguments(self) -> None:
        with pytest.raises(ValueError):
            power_normalize(torch.ones(2, 4), p=0.0)
        with pytest.raises(ShapeMismatchError):
            power_normalize(torch.ones(4))

    def test_gradient_matches_finite_differences(self) -> None:
        z = torch.randn(2, 6, dtype=torch.float64, generator=torch.Generator().manual_seed(2))

        assert torch.autograd.gradcheck(
            lambda t: power_normalize(t, 1.5), (z.requires_grad_(),), rtol=1e-4
        )

    @pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e3])
    def test_scale_invariant(self, c: float) -> None:
        z = torch.randn(4, 32, dtype=torch.float64, generator=torch.Generator().manual_seed(3))

        assert torch.allclose(power_normalize(c * z), power_normalize(z), atol=1e-12)


class TestCodecGradients:
    """Tests for analytic gradients through the encoder and decoder."""

    @pytest.fixture
    def small_codec(self) -> tuple[Encoder, Decoder]:
        config = CodecConfig(
            num_filters=2, latent_channels=2, downsample_stages=1, input_shape=(4, 4, 3)
        )
        return build_codec(config, init_seed=0, dtype=torch.float64)

    def test_encode_matches_finite_differences(
        self, small_codec: tuple[Encoder, Decoder]
    ) -> None:
        encoder, _ = small_codec
        generator = torch.Generator().manual_seed(4)
        images = torch.rand(2, 3, 4, 4, dtype=torch.float64, generator=generator)

        assert torch.autograd.gradcheck(
            lambda t: encode(t, encoder), (images.requires_grad_(),), rtol=1e-4
        )

    def test_decode_matches_finite_differences(
        self, small_codec: tuple[Encoder, Decoder]
    ) -> None:
        _, decoder = small_codec
        y = torch.randn(2, 8, dtype=torch.float64, generator=torch.Generator().manual_seed(5))

        assert torch.autograd.gradcheck(
            lambda t: decode(t, decoder), (y.requires_grad_(),), rtol=1e-4
        )
