"""Ten integrals over [-1, 1] with closed forms, references evaluated by mpmath at 40 digits."""

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def _ref(expr) -> float:
    return float(expr)


E = mp.e
# (name, integrand, reference, entire)
CORPUS = [
    ("x^2", lambda x: x**2, _ref(mp.mpf(2) / 3), True),
    ("exp", np.exp, _ref(E - 1 / E), True),
    ("rational", lambda x: 1 / (1 + x * x / 9), _ref(6 * mp.atan(mp.mpf(1) / 3)), False),
    ("cos3x", lambda x: np.cos(3 * x), _ref(2 * mp.sin(3) / 3), True),
    ("cosh", np.cosh, _ref(2 * mp.sinh(1)), True),
    ("x^4 exp", lambda x: x**4 * np.exp(x), _ref(9 * E - 65 / E), True),
    ("1/(x+3)", lambda x: 1 / (x + 3), _ref(mp.log(2)), False),
    ("sqrt(x+4)", lambda x: np.sqrt(x + 4), _ref(mp.mpf(2) / 3 * (5 ** mp.mpf(1.5) - 3 ** mp.mpf(1.5))), False),
    ("gauss", lambda x: np.exp(-x * x), _ref(mp.sqrt(mp.pi) * mp.erf(1)), True),
    ("log(x+3)", lambda x: np.log(x + 3), _ref(6 * mp.log(2) - 2), False),
]
