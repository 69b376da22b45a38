"""Bisection for the canonical radial ground state R'' + (d-1)/r R' - R + R^3 = 0.

Independent of the Rust shooting code: scipy DOP853 with terminal events.
Prints the final bracket for R(0).
"""
import sys

from scipy.integrate import solve_ivp


def shoot(r0, d, rmax=15.0):
    h = 1e-6
    y0 = [r0 + h * h / (2 * d) * (r0 - r0**3), h / d * (r0 - r0**3)]

    def f(r, y):
        return [y[1], -(d - 1) / r * y[1] + y[0] - y[0] ** 3]

    def crosses_zero(r, y):
        return y[0]

    def turns_up(r, y):
        return y[1]

    crosses_zero.terminal = True
    turns_up.terminal = True
    s = solve_ivp(f, [h, rmax], y0, rtol=1e-13, atol=1e-15,
                  events=[crosses_zero, turns_up], method="DOP853")
    if s.t_events[0].size:
        return 1
    if s.t_events[1].size:
        return -1
    return 0


def main():
    d = int(sys.argv[1]) if len(sys.argv) > 1 else 2
    lo, hi = (2.0, 2.5) if d == 2 else (1.0, 2.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if shoot(mid, d) > 0:
            hi = mid
        else:
            lo = mid
    print(repr(lo), repr(hi))


if __name__ == "__main__":
    main()
