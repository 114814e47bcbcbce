"""
Small numerical helpers shared by the services.
"""
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from utils.error_handler import BisectionError

# Smallest relative tolerance brentq accepts
MIN_RTOL = 4.0 * np.finfo(float).eps


def bracketed_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    open_ends: bool = True,
    xtol: float = 1e-13,
    rtol: float = 1e-13,
    max_iter: int = 200,
) -> float:
    """
    Find the single sign change of fn on the bracket (lo, hi) with Brent's method.

    With open_ends the bracket is moved one ulp inwards on each side, so the
    endpoints may be poles of fn.

    Args:
        fn: Function with exactly one sign change on the bracket
        lo: Left end of the bracket
        hi: Right end of the bracket
        open_ends: Never evaluate fn at lo or hi
        xtol: Absolute tolerance on the root
        rtol: Relative tolerance on the root
        max_iter: Iteration cap

    Returns:
        The root

    Raises:
        BisectionError: If the bracket is empty, holds no sign change or
            the iteration does not converge
    """
    if not lo < hi:
        raise BisectionError(f"Empty bracket ({lo}, {hi})", bracket=(lo, hi))

    a, b = lo, hi
    if open_ends:
        a = float(np.nextafter(lo, hi))
        b = float(np.nextafter(hi, lo))
        if not a < b:
            raise BisectionError(f"Empty bracket ({lo}, {hi})", bracket=(lo, hi))

    try:
        root, result = brentq(
            fn, a, b,
            xtol=xtol, rtol=max(rtol, MIN_RTOL), maxiter=max_iter,
            full_output=True, disp=False
        )
    except ValueError as e:
        raise BisectionError(f"No sign change on ({lo}, {hi}): {e}", bracket=(lo, hi)) from e

    if not result.converged:
        raise BisectionError(
            f"Root search did not converge in {max_iter} iterations ({result.flag})",
            bracket=(lo, hi), details={'iterations': result.iterations}
        )
    return float(root)
