import numpy as np
import pytest

from impulsecert import compfun as cf
from impulsecert import hybrid_time as ht
from impulsecert import systems as sl
from impulsecert.gains import AssumptionEnvelopes, IssCertificateData


@pytest.fixture
def ident():
    return cf.identity()


@pytest.fixture
def nine_jumps():
    return ht.ImpulseSequence(tuple(float(k) for k in range(1, 10)), 10.0)


@pytest.fixture
def s1():
    return sl.s1_system()


@pytest.fixture
def s2():
    return sl.s2_system()


@pytest.fixture
def halving_beta():
    return cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0)))


@pytest.fixture
def halving_cert(halving_beta):
    return IssCertificateData(halving_beta, cf.linear(2.0))


@pytest.fixture
def unit_envelopes():
    ident = cf.identity()
    return AssumptionEnvelopes(
        phi_tilde_f=ident, eta_f=ident, phi_f=ident, N_f=1.0, O_f=0.0, P_f=1.0,
        phi_tilde_g=ident, eta_g=ident, phi_g=ident, N_g=1.0, O_g=0.0, P_g=1.0,
        L_f=1.0)
