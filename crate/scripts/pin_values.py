#!/usr/bin/env python3
"""Regenerate crates/core/tests/data/golden.json with 50-digit mpmath.

Every quantity is computed from first principles here (explicit I0 series,
CODATA constants, mpmath root finding); nothing is read back from the Rust
crate.
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 50

E_CHARGE = mp.mpf("1.602176634e-19")
HBAR = mp.mpf("1.054571817e-34")
M_E = mp.mpf("9.1093837015e-31")
EPS0 = mp.mpf("8.8541878128e-12")

GAAS = dict(m=mp.mpf("0.067"), kappa=mp.mpf("13.1"), hw0_mev=mp.mpf(3))


def i0_series(x):
    x = mp.mpf(x)
    q = x * x / 4
    term = mp.mpf(1)
    total = mp.mpf(1)
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if term < total * mp.mpf(10) ** (-mp.mp.dps):
            return total


def material(mat):
    m = mat["m"] * M_E
    omega0 = mat["hw0_mev"] * mp.mpf("1e-3") * E_CHARGE / HBAR
    a_b = mp.sqrt(HBAR / (m * omega0))
    hw0 = HBAR * omega0
    c = mp.sqrt(mp.pi / 2) * E_CHARGE**2 / (4 * mp.pi * EPS0 * mat["kappa"] * a_b) / hw0
    return m, omega0, a_b, c


def compression(mat, b_tesla):
    m, omega0, _, _ = material(mat)
    ell = E_CHARGE * b_tesla / (2 * m) / omega0
    return mp.sqrt(1 + ell**2)


def efield_ratio(mat, e_field, a_m):
    _, omega0, _, _ = material(mat)
    return E_CHARGE * e_field * a_m / (HBAR * omega0)


def exchange(b, d, c, ef):
    b, d, c, ef = map(mp.mpf, (b, d, c, ef))
    d2 = d * d
    s = 2 * d2 * (2 * b - 1 / b)
    z = d2 * (b - 1 / b)
    bessel = c * mp.sqrt(b) * (mp.exp(-b * d2) * i0_series(b * d2) - mp.exp(z) * i0_series(z))
    return (bessel + mp.mpf(3) / (4 * b) * (1 + b * d2) + mp.mpf(3) / 2 * ef**2 / d2) / mp.sinh(s)


def overlap(b, d):
    return mp.exp(-mp.mpf(d) ** 2 * (2 * mp.mpf(b) - 1 / mp.mpf(b)))


def j_lab_mev(mat, b_tesla, e_field, d, c):
    _, _, a_b, _ = material(mat)
    b = compression(mat, b_tesla)
    ef = efield_ratio(mat, e_field, d * a_b)
    return exchange(b, d, c, ef) * mat["hw0_mev"]


def b_star(mat, e_field, d, c, b_max=40):
    f = lambda bt: j_lab_mev(mat, bt, e_field, d, c)
    lo = mp.mpf(0)
    while f(lo + mp.mpf("0.25")) > 0:
        lo += mp.mpf("0.25")
        if lo > b_max:
            raise ValueError("no switch below b_max")
    hi = lo + mp.mpf("0.25")
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def main():
    _, _, a_b, c_gaas = material(GAAS)
    m, _, _, _ = material(GAAS)
    larmor_mev = HBAR * E_CHARGE * 1 / (2 * m) / (mp.mpf("1e-3") * E_CHARGE)

    out = {
        "constants": {
            "bohr_radius_nm": a_b * mp.mpf("1e9"),
            "c_gaas": c_gaas,
            "hbar_larmor_mev_1T": larmor_mev,
            "b_1T": compression(GAAS, 1),
            "efield_ratio_1e5_13_65nm": efield_ratio(GAAS, mp.mpf("1e5"), mp.mpf("13.65e-9")),
        },
        "overlap": [
            {"b": b, "d": d, "S": overlap(b, d)}
            for b, d in [(1.0, 0.7), (1.0406, 0.7), (1.5, 0.3), (2.0, 1.5)]
        ],
        "exchange": [
            {"b": b, "d": d, "c": c, "efield_ratio": ef, "j": exchange(b, d, c, ef)}
            for b, d, c, ef in [
                (1.0, 0.7, 2.36, 0.0),
                (1.0, 0.7, float(c_gaas), 0.0),
                (1.0406, 0.7, 2.36, 0.0),
                (1.5, 0.5, 2.36, 0.3),
                (2.0, 1.0, 2.36, 1.2),
                (1.2, 0.3, 2.36, 0.0),
            ]
        ],
        "bessel_i0": [{"x": x, "i0": i0_series(x)} for x in [0, 0.5, 1, 2, 5, 7.5, 10, 30, 100]],
        "b_star": [
            {"e_field": e, "d": 0.7, "c": 2.36, "b_star_tesla": b_star(GAAS, e, 0.7, 2.36)}
            for e in [0.0, 2.5e5, 5.0e5, 7.5e5]
        ]
        + [{"e_field": 0.0, "d": 0.7, "c": None, "b_star_tesla": b_star(GAAS, 0, 0.7, c_gaas)}],
    }

    def plain(v):
        if isinstance(v, dict):
            return {k: plain(x) for k, x in v.items()}
        if isinstance(v, list):
            return [plain(x) for x in v]
        if isinstance(v, mp.mpf):
            return float(v)
        return v

    path = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/data/golden.json"
    path.write_text(json.dumps(plain(out), indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
