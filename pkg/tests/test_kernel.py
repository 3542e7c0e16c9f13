import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dbel import _backend
from dbel._engine import Evaluator
from dbel.dbel import log_ts_for_direction
from dbel.samples import MultivariateSample

compiled = _backend.compiled_scan_line()
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernel not built")


def _pair(seed, n, m, coarse):
    rng = np.random.default_rng(seed)
    if coarse:
        draw = lambda k: rng.integers(-3, 4, size=(k, 2)).astype(float)
    else:
        draw = lambda k: rng.normal(size=(k, 2))
    return MultivariateSample(draw(n)), MultivariateSample(draw(m))


@needs_compiled
@given(st.integers(4, 25), st.integers(4, 25), st.integers(0, 2**32 - 1), st.booleans())
def test_backends_bit_identical(n, m, seed, coarse):
    x, y = _pair(seed, n, m, coarse)
    ev_c = Evaluator(x, y, scan=compiled)
    ev_p = Evaluator(x, y, scan=_backend.python_scan_line)
    P = ev_c.P
    # slopes, exact breakpoints (ties) and an unsorted list of points
    w = ev_c.scan_cells(P[:, 0], P[:, 1]).w
    rng = np.random.default_rng(seed)
    pts = np.concatenate([w, rng.normal(size=5) * 3, [0.0]])
    rng.shuffle(pts)
    a = ev_c.scan(P[:, 0], P[:, 1], pts)
    b = ev_p.scan(P[:, 0], P[:, 1], pts)
    np.testing.assert_array_equal(a, b)


@given(st.integers(4, 12), st.integers(4, 12), st.integers(0, 2**32 - 1))
def test_scan_matches_direct_evaluation(n, m, seed):
    x, y = _pair(seed, n, m, False)
    ev = Evaluator(x, y)
    P = ev.P
    t = np.random.default_rng(seed).normal(size=6)
    got = ev.scan(P[:, 0], P[:, 1], t)
    want = [log_ts_for_direction(x, y, (1.0, s)) for s in t]
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-10)


def test_pure_python_switch():
    env = dict(os.environ, DBEL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dbel; print(dbel.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_compiled_selected_by_default():
    if os.environ.get("DBEL_PURE_PYTHON") in ("1", "true", "yes"):
        pytest.skip("fallback forced by environment")
    assert _backend.BACKEND == "compiled"
