import sys
import textwrap

import numpy as np
import pytest
import pywt
from pydantic import ValidationError

from pnpmri.core.types import ComplexImage
from pnpmri.exceptions import DenoiserError, FormatError, InvalidArgumentError
from pnpmri.kinds import DenoiserKind
from pnpmri.priors import (
    DenoiserSpec,
    ExternalDenoiser,
    check_zero_sigma,
    denoise,
    denoise_array,
    moreau_envelope,
    open_denoiser,
    parse_header,
    regularizer_value,
    request_header,
    soft_threshold,
    subgradient_distance,
)
from pnpmri.priors import wavelet as wt

from conftest import random_image

ECHO_SCRIPT = textwrap.dedent(
    """
    import sys
    import time

    import numpy as np

    mode = sys.argv[1] if len(sys.argv) > 1 else "shrink"
    inp, out = sys.stdin.buffer, sys.stdout.buffer
    while True:
        header = inp.readline()
        if not header:
            break
        _, h, w, sigma = header.split()
        h, w, sigma = int(h), int(w), float(sigma)
        data = np.frombuffer(inp.read(h * w * 16), dtype="<c16").reshape(h, w)
        if mode == "crash":
            sys.stderr.write("model failed to load\\n")
            sys.stderr.flush()
            sys.exit(3)
        if mode == "hang":
            time.sleep(30)
        if mode == "garbage":
            out.write(b"NOPE\\n")
            out.flush()
            sys.exit(0)
        result = data / (1.0 + sigma)
        if mode == "reformat":
            header = ("DNZ1  %d %d\\t%.6g\\r\\n" % (h, w, sigma)).encode()
        if mode == "transpose":
            header = ("DNZ1 %d %d %r\\n" % (w, h, sigma)).encode()
        out.write(header + result.astype("<c16").tobytes())
        out.flush()
    """
)


@pytest.fixture
def external_spec(tmp_path):
    script = tmp_path / "denoiser.py"
    script.write_text(ECHO_SCRIPT)

    def _build(mode="shrink", timeout=10.0):
        return DenoiserSpec(
            kind=DenoiserKind.EXTERNAL,
            executable=sys.executable,
            args=[str(script), mode],
            workdir=str(tmp_path),
            timeout=timeout,
        )

    return _build


def test_soft_threshold_examples():
    assert soft_threshold(3.0, 1.0) == 2.0
    assert soft_threshold(0.5, 1.0) == 0.0
    assert soft_threshold(0.0, 0.0) == 0.0
    assert soft_threshold(3 + 4j, 1.0) == pytest.approx(2.4 + 3.2j, abs=1e-15)
    with pytest.raises(InvalidArgumentError):
        soft_threshold(1.0, -0.1)


def test_soft_threshold_keeps_the_phase(rng):
    z = random_image(rng, (10, 10))
    out = soft_threshold(z, 0.5)
    kept = np.abs(z) > 0.5
    np.testing.assert_allclose(np.abs(out[kept]), np.abs(z[kept]) - 0.5, atol=1e-14)
    np.testing.assert_allclose(np.angle(out[kept]), np.angle(z[kept]), atol=1e-12)
    assert np.all(out[~kept] == 0)


@pytest.mark.parametrize(
    "kind",
    [DenoiserKind.IDENTITY, DenoiserKind.SOFT_THRESHOLD, DenoiserKind.WAVELET_SOFT_THRESHOLD],
)
def test_zero_sigma_is_the_identity(rng, kind):
    data = random_image(rng, (16, 16))
    out = denoise_array(DenoiserSpec(kind=kind), data, 0.0)
    np.testing.assert_array_equal(out, data)
    assert out is not data


def test_negative_sigma_is_rejected(rng):
    with pytest.raises(InvalidArgumentError):
        denoise_array(DenoiserSpec(), random_image(rng, (8, 8)), -1.0)


def test_identity_ignores_sigma(rng):
    data = random_image(rng, (8, 8))
    np.testing.assert_array_equal(
        denoise_array(DenoiserSpec(kind=DenoiserKind.IDENTITY), data, 10.0), data
    )


def test_wavelet_leaves_constants_alone():
    spec = DenoiserSpec(levels=1)
    data = np.full((2, 2), 0.7 - 0.2j)
    for sigma in (0.1, 1.0, 100.0):
        np.testing.assert_allclose(denoise_array(spec, data, sigma), data, rtol=1e-14)


def test_wavelet_shrinkage_matches_coefficient_oracle(rng):
    data = random_image(rng, (16, 16))
    tau = 0.3
    spec = DenoiserSpec(levels=2, tau_gain=1.0)
    real = pywt.wavedec2(data.real, "haar", mode="periodization", level=2)
    imag = pywt.wavedec2(data.imag, "haar", mode="periodization", level=2)
    shrunk_re, shrunk_im = [real[0]], [imag[0]]
    for bands_re, bands_im in zip(real[1:], imag[1:]):
        level_re, level_im = [], []
        for band_re, band_im in zip(bands_re, bands_im):
            band = band_re + 1j * band_im
            modulus = np.abs(band)
            factor = np.maximum(1 - tau / np.maximum(modulus, 1e-300), 0)
            level_re.append((band * factor).real)
            level_im.append((band * factor).imag)
        shrunk_re.append(tuple(level_re))
        shrunk_im.append(tuple(level_im))
    expected = pywt.waverec2(shrunk_re, "haar", mode="periodization") + 1j * pywt.waverec2(
        shrunk_im, "haar", mode="periodization"
    )
    np.testing.assert_allclose(denoise_array(spec, data, tau), expected, atol=1e-12)


def test_wavelet_shrinkage_is_a_proximal_operator(rng):
    spec = DenoiserSpec(levels=2, tau_gain=1.0)
    u = random_image(rng, (16, 16))
    sigma = 0.4
    p = denoise_array(spec, u, sigma)

    def objective(z):
        return regularizer_value(spec, z, sigma) + 0.5 * np.sum(np.abs(z - u) ** 2)

    best = objective(p)
    for _ in range(20):
        assert best <= objective(p + 1e-3 * random_image(rng, u.shape)) + 1e-12
    assert moreau_envelope(spec, u, sigma) == pytest.approx(best, rel=1e-12)
    assert subgradient_distance(spec, sigma, p, u - p) <= 1e-10


def test_wavelet_transform_is_orthonormal(rng):
    for wavelet in ("haar", "db2"):
        data = random_image(rng, (32, 32))
        coeffs, slices = wt.analysis(data, wavelet, 3)
        assert np.linalg.norm(coeffs) == pytest.approx(np.linalg.norm(data), rel=1e-12)
        np.testing.assert_allclose(wt.synthesis(coeffs, slices, wavelet), data, atol=1e-12)


def test_builtin_denoisers_are_nonexpansive(rng):
    specs = [
        DenoiserSpec(kind=DenoiserKind.SOFT_THRESHOLD),
        DenoiserSpec(wavelet="db2"),
        DenoiserSpec(),
    ]
    for spec in specs:
        for _ in range(10):
            a, b = random_image(rng, (32, 32)), random_image(rng, (32, 32))
            gap = np.linalg.norm(denoise_array(spec, a, 0.5) - denoise_array(spec, b, 0.5))
            assert gap <= np.linalg.norm(a - b) * (1 + 1e-12)


def test_wavelet_shape_must_fit_the_levels(rng):
    with pytest.raises(InvalidArgumentError):
        denoise_array(DenoiserSpec(levels=3), random_image(rng, (12, 12)), 0.1)
    with pytest.raises(InvalidArgumentError):
        denoise_array(DenoiserSpec(levels=3), random_image(rng, (12, 12)), 0.0)


def test_spec_validation(tmp_path):
    with pytest.raises(ValidationError):
        DenoiserSpec(wavelet="bior2.2")
    with pytest.raises(ValidationError):
        DenoiserSpec(levels=0)
    with pytest.raises(ValidationError):
        DenoiserSpec(kind=DenoiserKind.EXTERNAL)
    with pytest.raises(ValidationError):
        DenoiserSpec(kind=DenoiserKind.EXTERNAL, executable=str(tmp_path / "missing"))
    with pytest.raises(ValidationError):
        DenoiserSpec(
            kind=DenoiserKind.EXTERNAL, executable=sys.executable, workdir=str(tmp_path / "no")
        )
    assert DenoiserSpec(tau_gain=2.0).threshold(0.5) == 1.0


def test_pixel_functionals_on_scalars():
    spec = DenoiserSpec(kind=DenoiserKind.SOFT_THRESHOLD, tau_gain=1.0)
    assert moreau_envelope(spec, np.array([[3.0 + 0j]]), 1.0) == pytest.approx(2.5)
    assert moreau_envelope(spec, np.array([[0.5 + 0j]]), 1.0) == pytest.approx(0.125)
    one, zero = np.array([[1.0 + 0j]]), np.zeros((1, 1), dtype=np.complex128)
    assert subgradient_distance(spec, 1.0, one, one) == pytest.approx(0.0, abs=1e-15)
    assert subgradient_distance(spec, 1.0, zero, 0.5 * one) == 0.0
    assert subgradient_distance(spec, 1.0, zero, 1.5 * one) == pytest.approx(0.5)
    assert subgradient_distance(spec, 1.0, one, zero) == pytest.approx(1.0)
    external = DenoiserSpec(kind=DenoiserKind.EXTERNAL, executable=sys.executable)
    with pytest.raises(InvalidArgumentError):
        regularizer_value(external, one, 1.0)


def test_denoise_wraps_images(rng):
    u = ComplexImage(random_image(rng, (8, 8)))
    out = denoise(DenoiserSpec(kind=DenoiserKind.SOFT_THRESHOLD), u, 0.1)
    np.testing.assert_array_equal(out.data, soft_threshold(u.data, np.sqrt(2) * 0.1))


def test_request_header():
    assert request_header(4, 8, 0.5) == b"DNZ1 4 8 0.5\n"
    assert request_header(1, 1, 0) == b"DNZ1 1 1 0.0\n"


def test_parse_header():
    assert parse_header(b"DNZ1 4 8 0.5\n") == (4, 8, 0.5)
    assert parse_header(b"DNZ1\t4  8 1e-05\r\n") == (4, 8, 1e-05)
    assert parse_header(request_header(3, 5, 0.1)) == (3, 5, 0.1)
    for bad in (b"DNZ2 4 8 0.5\n", b"DNZ1 4 8\n", b"DNZ1 4 eight 0.5\n", b""):
        with pytest.raises(FormatError):
            parse_header(bad)


def test_external_reply_header_may_be_reformatted(external_spec, rng):
    data = random_image(rng, (4, 6))
    with ExternalDenoiser(external_spec("reformat")) as handle:
        sigma = 0.1234567891
        np.testing.assert_allclose(handle(data, sigma), data / (1.0 + sigma), rtol=1e-15)


def test_external_reply_must_keep_the_shape(external_spec, rng):
    with ExternalDenoiser(external_spec("transpose")) as handle:
        with pytest.raises(DenoiserError, match="reply is 6x4"):
            handle(random_image(rng, (4, 6)), 0.1)


def test_external_denoiser_round_trip(external_spec, rng):
    data = random_image(rng, (8, 6))
    with open_denoiser(external_spec()) as handle:
        assert isinstance(handle, ExternalDenoiser)
        np.testing.assert_allclose(handle(data, 1.0), data / 2.0, rtol=1e-15)
        pid = handle._proc.pid  # pylint: disable=protected-access
        np.testing.assert_allclose(handle(data, 3.0), data / 4.0, rtol=1e-15)
        assert handle._proc.pid == pid  # pylint: disable=protected-access
        assert check_zero_sigma(handle, data)


def test_external_denoise_convenience(external_spec, rng):
    u = ComplexImage(random_image(rng, (4, 4)))
    np.testing.assert_allclose(denoise(external_spec(), u, 1.0).data, u.data / 2.0, rtol=1e-15)


def test_external_malformed_reply(external_spec, rng):
    with ExternalDenoiser(external_spec("garbage")) as handle:
        with pytest.raises(DenoiserError):
            handle(random_image(rng, (4, 4)), 0.1)


def test_external_crash(external_spec, rng):
    with ExternalDenoiser(external_spec("crash")) as handle:
        with pytest.raises(DenoiserError):
            handle(random_image(rng, (4, 4)), 0.1)


def test_external_timeout(external_spec, rng):
    with ExternalDenoiser(external_spec("hang", timeout=0.5)) as handle:
        with pytest.raises(DenoiserError, match="no reply"):
            handle(random_image(rng, (4, 4)), 0.1)
