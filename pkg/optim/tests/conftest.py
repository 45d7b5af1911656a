import numpy as np
import pytest

@pytest.fixture
def rng():
    return np.random.default_rng(20240601)

@pytest.fixture
def make_problem():
    from optim.imaging import BlurOperator, gaussian_psf, simulate_data, synth_phantom
    from optim.spdhg import SPDHGProblem
    def do_make_problem(N=8, beta=0.05, background=10.0, i_max=50.0, kind='disks', seed=3, psf_size=3, sigma=1.0,
                        intensity=(1.0, 100.0)):
        x_true = synth_phantom(kind, N, intensity)
        counts_op = BlurOperator(gaussian_psf(psf_size, sigma), N)
        data = simulate_data(x_true, counts_op, i_max, background, seed)
        op = BlurOperator(gaussian_psf(psf_size, sigma), N, background=data.background)
        return SPDHGProblem(data.g, op, beta), x_true
    return do_make_problem
