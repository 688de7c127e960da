import json

import numpy as np
import pytest

from kdppgeom.errors import KernelFileError
from kdppgeom.kernelfile import (
    kernel_to_json,
    load_kernel,
    parse_kernel,
    parse_subset_line,
    save_kernel,
    spectral_to_json,
)
from kdppgeom.linalg import eig_sym


def test_matrix_form_roundtrip(tmp_path):
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    path = tmp_path / "k.json"
    save_kernel(path, m, name="two")
    kf = load_kernel(path)
    assert np.array_equal(kf.matrix, m) and kf.name == "two" and kf.spectral is None


def test_spectral_form():
    spec = eig_sym([[2.0, 1.0], [1.0, 2.0]])
    kf = parse_kernel(spectral_to_json(spec))
    np.testing.assert_allclose(kf.matrix, [[2, 1], [1, 2]], atol=1e-14)
    np.testing.assert_allclose(kf.spectral.lambdas, [3, 1])


@pytest.mark.parametrize(
    "obj",
    [
        [],
        {},
        {"n": 2, "matrix": [1, 0, 0, 1], "eigenvalues": [1, 1], "eigenvectors": [1, 0, 0, 1]},
        {"n": 2, "matrix": [1, 2, 0, 1]},
        {"n": 2, "matrix": [1, 0, 0]},
        {"n": 0, "matrix": []},
        {"eigenvalues": [1, 1], "eigenvectors": [1, 1, 0, 1]},
        {"eigenvalues": [1, 1]},
        {"n": 1, "matrix": ["a"]},
    ],
)
def test_malformed(obj):
    with pytest.raises(KernelFileError):
        parse_kernel(obj)


def test_rejects_nan(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1, "matrix": [NaN]}')
    with pytest.raises(KernelFileError):
        load_kernel(path)
    path.write_text("{not json")
    with pytest.raises(KernelFileError):
        load_kernel(path)
    with pytest.raises(KernelFileError):
        load_kernel(tmp_path / "missing.json")


def test_kernel_json_shape():
    obj = kernel_to_json(np.eye(2), description="id")
    assert obj == {"n": 2, "matrix": [1.0, 0.0, 0.0, 1.0], "description": "id"}
    json.dumps(obj, allow_nan=False)


def test_subset_lines():
    assert parse_subset_line("1,3, 4  # note") == [1, 3, 4]
    assert parse_subset_line("   ") is None
    assert parse_subset_line("# only a comment") is None
    with pytest.raises(KernelFileError):
        parse_subset_line("1,x")
