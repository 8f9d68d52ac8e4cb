import os
import subprocess
import sys

import numpy as np
import pytest

from phicov import kernels
from phicov.counting import make_family
from phicov.instance import random_instance

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


def test_cython_backend_built():
    # the compiled core is part of the normal install
    assert "cython" in BACKENDS
    assert kernels.BACKEND == ("python" if os.environ.get("PHICOV_PURE_PYTHON") else "cython")


def test_pure_python_switch():
    env = dict(os.environ, PHICOV_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from phicov import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_pb_convolve_examples(backend):
    assert np.allclose(backend.pb_convolve([1.0, 1.0]), [0, 0, 1])
    assert np.allclose(backend.pb_convolve([0.5, 0.5]), [0.25, 0.5, 0.25])
    assert np.allclose(backend.pb_convolve([]), [1.0])


def test_backend_parity():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    rng = np.random.default_rng(11)
    for d in [0, 1, 5, 40]:
        p = rng.random(d)
        assert np.allclose(py.pb_convolve(p), cy.pb_convolve(p), atol=1e-15, rtol=0)
    phi = make_family("pav")
    for x in [0.0, 0.3, 1.0, 9.5, 80.0]:
        a = py.poisson_expectation(phi.array, phi.tail_slope, x, 1e-13)
        b = cy.poisson_expectation(phi.array, phi.tail_slope, x, 1e-13)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
    for seed in range(10):
        inst = random_instance(12, 9, 0.4, (0.5, 2.0), seed=seed)
        indptr, indices = inst.csr
        x = rng.random(inst.m)
        table = phi.table(max(inst.max_degree, 1))
        mask = (rng.random(inst.m) < 0.5).astype(np.uint8)
        args = (indptr, indices, x, inst.weight_array, table)
        assert py.multilinear(*args) == pytest.approx(cy.multilinear(*args), abs=1e-12)
        args = (indptr, indices, mask, inst.weight_array, table)
        assert py.coverage_value(*args) == pytest.approx(cy.coverage_value(*args), abs=1e-12)


def test_kernels_accept_readonly_inputs(backend):
    phi = make_family("geo:p=0.3")
    assert not phi.array.flags.writeable
    v = backend.poisson_expectation(phi.array, phi.tail_slope, 2.0, 1e-12)
    assert 0 < v < 2.0
