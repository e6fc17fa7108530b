"""Smoke test for the `wpa` extension module.

Build and install first, e.g. `pip install --no-build-isolation ./crates/py`.
"""
import math

import wpa


def close(a, b, tol):
    return abs(a - b) <= tol * max(abs(b), 1e-300)


def main():
    assert wpa.w(0j) == 1
    assert close(wpa.w(1j).real, math.e * math.erfc(1.0), 1e-14)
    assert close(wpa.w_derivative(0j), 2j / math.sqrt(math.pi), 1e-15)
    assert close(wpa.w_series(0.1j), wpa.w(0.1j), 1e-14)

    tg = wpa.WavePacket.truncated_gaussian()
    g = wpa.WavePacket.gaussian()
    lg = wpa.WavePacket.linear_gaussian(beta=1.0)
    ls = wpa.WavePacket.from_spec("state=lorentzian_squared alpha=1")
    assert tg.name == "truncated_gaussian" and ls.name == "lorentzian_squared"
    assert tg.momentum_amplitude(-1.0) == 0
    assert close(ls.momentum_amplitude(1.0).real, -2 / math.e, 1e-15)

    for x, t in [(0.0, 1.0), (3.0, 20.0), (-8.0, 500.0)]:
        a = wpa.evolve(tg, x, t, route="closed_form")
        b = wpa.evolve(tg, x, t, route="quadrature", rel_tol=1e-10)
        assert close(b, a, 1e-8), (x, t, a, b)

    fit = wpa.fit_exponent(tg, t_min=1e3, t_max=1e6)
    assert abs(fit["asymptotic_exponent"] + 3) < 0.05, fit["asymptotic_exponent"]
    fit = wpa.fit_exponent(g, t_min=1e3, t_max=1e6)
    assert abs(fit["asymptotic_exponent"] + 1) < 0.05

    times, rho = wpa.density_trace(lg, 0.0, 0.1, 1e3, per_decade=4)
    assert len(times) == len(rho) == 17
    for t, r in zip(times, rho):
        # |psi(0, t)|^2 for beta = 1 is 2 / (pi^{3/2} (1 + t^2))
        assert close(r, 2 / math.pi**1.5 / (1 + t * t), 1e-12)

    c1, c2 = lg.taylor_coefficients()
    err = abs(wpa.asymptotic_prediction(c1, c2, 1e4) - wpa.evolve(lg, 0.0, 1e4)) / abs(wpa.evolve(lg, 0.0, 1e4))
    assert err < 0.05

    report = wpa.dwell(tg, -1.0, 1.0)
    assert report["relative_discrepancy"] < 1e-3
    assert wpa.dwell(g, -1.0, 1.0)["momentum_route"] == "divergent"

    try:
        wpa.WavePacket.gaussian(delta=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative delta accepted")
    try:
        wpa.evolve(ls, 0.0, 1.0, route="closed_form")
    except ValueError:
        pass
    else:
        raise AssertionError("closed form for lorentzian_squared")

    heavy = wpa.UnitSystem(hbar=1.0, mass=2.0)
    tg_heavy = wpa.WavePacket.truncated_gaussian(units=heavy)
    assert close(wpa.dwell(tg_heavy, -1.0, 1.0)["momentum_route"], 2 * report["momentum_route"], 1e-9)

    print("wpa smoke test passed")


if __name__ == "__main__":
    main()
