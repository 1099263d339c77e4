import numpy as np
import pytest

from app.geometry.params import GroupParams
from app.geometry.scalars import FieldTag

SO21 = GroupParams(FieldTag.REAL, 2)
SO31 = GroupParams(FieldTag.REAL, 3)
SU21 = GroupParams(FieldTag.COMPLEX, 2)
SP21 = GroupParams(FieldTag.QUATERNION, 2)

ALL_GROUPS = [SO21, SO31, GroupParams(FieldTag.REAL, 4), SU21, GroupParams(FieldTag.COMPLEX, 3), SP21]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=ALL_GROUPS, ids=lambda p: p.label)
def params(request):
    return request.param
