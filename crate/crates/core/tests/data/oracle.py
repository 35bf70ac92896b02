"""Reference values for tests/oracle.rs, computed with mpmath at 50 digits
by brute-force summation over all configurations."""
import itertools
from mpmath import mp, mpf, exp, log, fsum

mp.dps = 50

bonds = [(0, 2), (0, 1), (1, 3), (2, 3)]
j_bonds = [mpf("0.9"), mpf("-1.1"), mpf("0.4"), mpf("-0.7")]
# boundary bonds in lattice order: sites 0,0,1,1,2,2,3,3
bsite = [0, 0, 1, 1, 2, 2, 3, 3]
j_boundary = [mpf(x) for x in ["0.3", "-0.5", "0.8", "0.2", "-0.6", "0.1", "0.45", "-0.35"]]
b = [mpf(x) for x in ["1", "-1", "0.5", "0", "1", "-0.25", "1", "-1"]]
h = [mpf(x) for x in ["0.1", "-0.2", "0.05", "0"]]
beta = mpf("0.7")
N = 4


def energy(s, bnd):
    e = -fsum(j * s[x] * s[y] for j, (x, y) in zip(j_bonds, bonds))
    e -= fsum(j * s[x] * bb for j, x, bb in zip(j_boundary, bsite, bnd))
    e -= fsum(hx * sx for hx, sx in zip(h, s))
    return e


configs = list(itertools.product([-1, 1], repeat=N))


def log_z1(bnd):
    return log(fsum(exp(-beta * energy(s, bnd)) for s in configs))


def pair(lam, bnd):
    z = r = r2 = mpf(0)
    for s in configs:
        for t in configs:
            dot = sum(a * c for a, c in zip(s, t))
            w = exp(-beta * (energy(s, bnd) + energy(t, bnd) - lam * dot))
            q = mpf(dot) / N
            z += w
            r += w * q
            r2 += w * q * q
    return log(z), r / z, r2 / z


def triple(lam, lamp, bnd):
    z = mpf(0)
    for s in configs:
        for t in configs:
            for u in configs:
                d12 = sum(a * c for a, c in zip(s, t))
                d13 = sum(a * c for a, c in zip(s, u))
                e = energy(s, bnd) + energy(t, bnd) + energy(u, bnd) - lam * d12 - lamp * d13
                z += exp(-beta * e)
    return log(z)


def mags(bnd):
    ws = [exp(-beta * energy(s, bnd)) for s in configs]
    z = fsum(ws)
    return [fsum(w * s[x] for w, s in zip(ws, configs)) / z for x in range(N)]


def q_value(bnd):
    return fsum(m * m for m in mags(bnd)) / N


print("log_z1", mp.nstr(log_z1(b), 20))
lz2, r, r2 = pair(mpf("0.3"), b)
print("log_z2(0.3)", mp.nstr(lz2, 20), "R", mp.nstr(r, 20), "R2", mp.nstr(r2, 20))
print("log_z2(-0.3)", mp.nstr(pair(mpf("-0.3"), b)[0], 20))
print("log_z3(0.3,-0.2)", mp.nstr(triple(mpf("0.3"), mpf("-0.2"), b), 20))
print("sum_m_sq/N", mp.nstr(q_value(b), 20))
best = None
for mask in range(256):
    corner = [mpf(1) if (mask >> u) & 1 else mpf(-1) for u in range(8)]
    v = q_value(corner)
    if best is None or v > best[0]:
        best = (v, mask)
print("best_corner", mp.nstr(best[0], 20), "mask", best[1])

# random energy model closed forms
ln2 = log(2)
bc = 2 * mp.sqrt(ln2)
print("beta_c", mp.nstr(bc, 20))
print("f(1.0)", mp.nstr(-(ln2 / 1 + mpf(1) / 4), 20))
print("q_br(2.5)", mp.nstr(mp.sqrt((bc / mpf("2.5")) * (1 - bc / mpf("2.5"))), 20))
print("q_br(2 beta_c)", mp.nstr(mp.sqrt(mpf(1) / 2 * (1 - mpf(1) / 2)), 20))
