"""Independent reference values for the frozen constants in crates/core/tests.

Every number is computed here with mpmath from the Fourier integral of the
kernel, F(y) = (1/pi) * int_0^inf cos(y xi) exp(-xi^4) dxi, without using
the Rust code. Run with `python3 tools/oracles.py`.
"""

from mpmath import mp, mpf, quad, cos, sin, exp, pi, log, sqrt, gamma, findroot, inf

mp.dps = 30
XI = [0, 1, 2, 3, 5]


def deriv(y, m):
    """m-th derivative of F at y in 1D."""
    y = mpf(y)
    if m % 2 == 0:
        g = lambda xi: xi**m * cos(y * xi) * exp(-xi**4)
        sign = (-1) ** (m // 2)
    else:
        g = lambda xi: xi**m * sin(y * xi) * exp(-xi**4)
        sign = (-1) ** ((m + 1) // 2)
    return sign * quad(g, XI) / pi


def zeros(limit=16.0, step=0.05):
    out, y, prev = [], mpf(step), deriv(step, 0)
    while y < limit:
        cur = deriv(y + step, 0)
        if prev * cur < 0:
            out.append(findroot(lambda t: deriv(t, 0), (y, y + step), solver="anderson"))
        y, prev = y + step, cur
    return out


def line(f, a=-30, b=30, cuts=()):
    pts = sorted({mpf(a), mpf(b), *map(mpf, cuts), *[mpf(t) for t in range(a, b + 1, 2)]})
    return quad(f, pts)


def main():
    print("F(0) 1D", deriv(0, 0), "closed form", gamma(mpf(5) / 4) / pi)
    print("F(0) 2D closed form", 1 / (8 * sqrt(pi)))
    print("first zeros of F on y > 0:")
    for z in zeros():
        print("  ", mp.nstr(z, 15))
    for y in [0, 1.5, 3]:
        print(f"psi_2({y}) = F''/sqrt2 =", mp.nstr(deriv(y, 2) / sqrt(2), 15))
    print("asymptotic decay rate 3/(8 4^(1/3)) =", mp.nstr(mpf(3) / (8 * mpf(4) ** (mpf(1) / 3)), 15))

    # -int ln|y + 0.1| F'''(y) dy, the integrated-by-parts form for
    # adjoint = y, combo = y + 0.1, target = F.
    shift = mpf("0.1")
    ibp = -line(lambda y: log(abs(y + shift)) * deriv(y, 3), cuts=(-shift,))
    print("log integral, adjoint y, combo y + 0.1, target F:", mp.nstr(ibp, 15))

    # Blow-up first-order coefficient at k = 3: 3 int F'''(y)/y dy - 9/16.
    i3 = 2 * quad(lambda y: deriv(y, 3) / y, [mpf("1e-30"), *range(1, 31, 2)])
    print("int F'''/y =", mp.nstr(i3, 15), "mu_{1,3} =", mp.nstr(3 * i3 - mpf(9) / 16, 15))

    # k = 4: int F^(5) y ln((y^4 + 24)/sqrt 24) dy - 1.
    r24 = sqrt(24)
    t4 = line(lambda y: deriv(y, 5) * y * log((y**4 + 24) / r24))
    print("mu_{1,4} =", mp.nstr(t4 - 1, 15))


if __name__ == "__main__":
    main()
