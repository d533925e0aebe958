import datetime as dt

import numpy as np
import pytest
import scipy.sparse as sp

from agenda.corpus import DocTermMatrix


@pytest.fixture
def tiny_dtm():
    """D=2, V=3, six tokens: the enumeration-oracle corpus."""
    counts = sp.csr_matrix(np.array([[2, 1, 0], [0, 1, 2]]))
    docs = [("house", dt.date(1901, 5, 9)), ("house", dt.date(1901, 5, 10))]
    return DocTermMatrix(docs=docs, counts=counts)


def make_dtm(array, chamber="house", start=dt.date(1901, 5, 9)):
    array = np.asarray(array)
    docs = [(chamber, start + dt.timedelta(days=i))
            for i in range(array.shape[0])]
    return DocTermMatrix(docs=docs, counts=sp.csr_matrix(array))
