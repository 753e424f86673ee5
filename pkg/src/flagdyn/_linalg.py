"""Small numerical helpers shared by the decomposition and flag modules."""
import numpy as np


def qr_positive(m):
    """QR with a positive diagonal in R; works on stacks of square matrices."""
    q, r = np.linalg.qr(m)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    s = np.where(s == 0, 1.0, s)
    q = q * s[..., None, :]
    r = r * s[..., :, None]
    return q, r


def orthonormal_complement(basis, d):
    """Columns completing ``basis`` (d x k, orthonormal) to an orthonormal basis of R^d."""
    k = basis.shape[1]
    if k == d:
        return np.zeros((d, 0))
    q, _ = np.linalg.qr(np.hstack([basis, np.eye(d)]))
    return q[:, k:d]


def projector(basis):
    return basis @ basis.T
