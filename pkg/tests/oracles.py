"""Independent high-precision reference values for the n = 3, m = 0.1 model.

``SDS`` holds literals frozen from :func:`sds_reference`, which recomputes
them with mpmath at 50 digits from the closed forms only. ``test_oracles.py``
checks the two agree.
"""

import mpmath as mp

SDS = {
    "r_minus": 0.20914884844131658,
    "r_plus": 0.87888506624997283,
    "r0": 0.46415888336127789,
    "umax": 0.59470126365296626,
    "k_plus": 1.2601705164785538,
    "k_minus": 3.4923729816373391,
    "H": 2.5624900652394958,
    "R_sigma": 9.2831776672255578,
    "sigma_area": 2.7073424779372677,
    "area_plus": 9.7067542442739766,
    "area_minus": 0.54969377582035472,
    "cell_ours": 14.151901200186351,
    "cell_ambrozio": 19.907407652729102,
    "six_umax": 3.5682075819177975,
    "r2_coefficient": -0.89205189547944938,
    "alpha": 8.8414996655,
}


def sds_reference(m="0.1", dps=50):
    """Recompute the ``SDS`` entries for ``n = 3`` with mpmath."""
    with mp.workdps(dps):
        m = mp.mpf(m)
        # f(r) = 1 - r^2 - 2m/r vanishes where r^3 - r + 2m = 0
        poly = lambda r: r**3 - r + 2 * m
        r0 = mp.cbrt(m)
        r_minus = mp.findroot(poly, (mp.mpf("1e-30"), r0), solver="illinois")
        r_plus = mp.findroot(poly, (r0, mp.mpf(1)), solver="illinois")
        umax = mp.sqrt(1 - r0**2 - 2 * m / r0)
        k = lambda r: abs(-2 * r + 2 * m / r**2) / (2 * umax)
        k_plus, k_minus = k(r_plus), k(r_minus)
        area_plus, area_minus = 4 * mp.pi * r_plus**2, 4 * mp.pi * r_minus**2
        # c n a^2 + (c(n+2) - 2(n-2)) a + 2c - 2(n-2)(n+1) = 0 with c = r_-^n / m
        c = r_minus**3 / m
        alpha = max(mp.polyroots([3 * c, 5 * c - 2, 2 * c - 8]), key=lambda z: mp.re(z))
        return {
            "r_minus": r_minus,
            "r_plus": r_plus,
            "r0": r0,
            "umax": umax,
            "k_plus": k_plus,
            "k_minus": k_minus,
            "H": 2 * mp.sqrt(m ** (-mp.mpf(2) / 3) - 3),
            "R_sigma": 2 * m ** (-mp.mpf(2) / 3),
            "sigma_area": 4 * mp.pi * r0**2,
            "area_plus": area_plus,
            "area_minus": area_minus,
            "cell_ours": k_plus * area_plus + k_minus * area_minus,
            "cell_ambrozio": 4 * mp.pi / 3 * (k_plus + k_minus),
            "six_umax": 6 * umax,
            "r2_coefficient": -mp.mpf(3) / 2 * umax,
            "alpha": mp.re(alpha),
        }
