"""Frequency-domain quadrature oracle for the Drude-Lorentz correlation function.

C(t) = (1/pi) * int_0^inf J(w) [coth(w/2T) cos(wt) - i sin(wt)] dw
J(w) = 2 lam wc w / (w^2 + wc^2)

Evaluated with mpmath's oscillatory quadrature. The printed values are frozen
into tests/bath_oracle.rs.
"""
import mpmath as mp

mp.mp.dps = 30


def corr(lam, wc, T, t):
    J = lambda w: 2 * lam * wc * w / (w**2 + wc**2)
    re = mp.quadosc(lambda w: J(w) * mp.coth(w / (2 * T)) * mp.cos(w * t), [0, mp.inf], omega=t)
    im = -mp.quadosc(lambda w: J(w) * mp.sin(w * t), [0, mp.inf], omega=t)
    return re / mp.pi, im / mp.pi


if __name__ == "__main__":
    for (lam, wc, T) in [(0.1, 0.1, 0.2), (0.1, 0.1, 0.1), (0.1, 0.1, 1.0), (0.05, 0.5, 0.2)]:
        for t in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0]:
            re, im = corr(lam, wc, T, t)
            print(f"({lam}, {wc}, {T}, {t}, {mp.nstr(re, 17)}, {mp.nstr(im, 17)}),")
