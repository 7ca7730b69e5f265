import mpmath
import pytest

from classpoly.bigfloat import BigReal


def to_mp(x):
    """Exact conversion of a BigReal / BigComplex to mpmath."""
    if isinstance(x, BigReal):
        n, d = x.value.as_integer_ratio()
        return mpmath.mpf(int(n)) / int(d)
    re, im = x.value.real.as_integer_ratio(), x.value.imag.as_integer_ratio()
    return mpmath.mpc(mpmath.mpf(int(re[0])) / int(re[1]), mpmath.mpf(int(im[0])) / int(im[1]))


def rel_err(value, ref):
    """|value - ref| / max(|ref|, 1) as an mpmath number."""
    return abs(to_mp(value) - ref) / max(abs(ref), 1)


def log2_rel_err(value, ref):
    e = rel_err(value, ref)
    return -10**9 if e == 0 else float(mpmath.log(e, 2))


@pytest.fixture
def mp_prec():
    """Run a test with a raised mpmath precision, restored afterwards."""
    old = mpmath.mp.prec

    def setter(bits):
        mpmath.mp.prec = bits

    yield setter
    mpmath.mp.prec = old


KNOWN = {
    -3: [0, 1],
    -4: [-1728, 1],
    -7: [3375, 1],
    -8: [-8000, 1],
    -11: [32768, 1],
    -15: [-121287375, 191025, 1],
    -23: [12771880859375, -5151296875, 3491750, 1],
    -163: [262537412640768000, 1],
}
