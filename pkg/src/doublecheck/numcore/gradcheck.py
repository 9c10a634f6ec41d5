"""Central-difference gradient checking."""
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, DomainError


@dataclass
class GradCheckReport:
    max_error: float
    param_index: int = -1
    coord: tuple = ()
    failure: str = ""

    @property
    def finite(self):
        return not self.failure

    def ok(self, tol):
        return self.finite and self.max_error < tol


def _value(f):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return f().item()


def grad_check(f, params, eps=1e-5, numeric_f=None):
    """Compare backprop gradients of scalar ``f()`` against central differences.

    ``params`` are perturbed in place and restored. The error per coordinate
    is ``|analytic - numeric| / max(1, |analytic|)``; the report holds the
    maximum and where it occurred. ``numeric_f`` (default ``f``) is the
    function differenced numerically; pass one when ``f`` stops gradients on
    purpose and the reference must hold those values fixed.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ContractError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    numeric_f = numeric_f or f
    params = list(params)
    for p in params:
        p.grad = None
    loss = f()
    if not np.isfinite(loss.data).all():
        return GradCheckReport(float("inf"), failure="non-finite loss at the base point")
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    report = GradCheckReport(0.0)
    for pi, p in enumerate(params):
        flat = p.data.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            coord = tuple(int(c) for c in np.unravel_index(j, p.shape))
            try:
                flat[j] = orig + eps
                up = _value(numeric_f)
                flat[j] = orig - eps
                down = _value(numeric_f)
            except DomainError as exc:
                return GradCheckReport(float("inf"), pi, coord, f"perturbing param {pi} at {coord}: {exc}")
            finally:
                flat[j] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                return GradCheckReport(float("inf"), pi, coord, f"non-finite loss perturbing param {pi} at {coord}")
            numeric = (up - down) / (2 * eps)
            a = analytic[pi].reshape(-1)[j]
            err = abs(a - numeric) / max(1.0, abs(a))
            if err > report.max_error:
                report = GradCheckReport(err, pi, coord)
    return report
