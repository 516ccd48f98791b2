"""Arbitrary-precision reference values frozen into tests/test_circuit.cpp."""
from mpmath import mp, mpf, mpc, exp, pi

mp.dps = 40

# NTC factor at B = 3950 K, t_ref = 298.15 K, T = 308.15 K.
print("ntc_factor", exp(mpf(3950) * (1 / mpf("308.15") - 1 / mpf("298.15"))))

# Parallel-plate gap capacitance, eps=1, area=1e-6, width=1e-3.
eps0 = mpf("8.8541878128e-12")
print("c_gap", eps0 * mpf("1e-6") / mpf("1e-3"))

# Impedance term by term for a representative ring at 4 GHz with R_sen = 1000 ohm.
R, L, Cs = mpf(4), mpf("10e-9"), mpf("0.2e-12")
d, A, er = mpf("0.4e-3"), mpf("2.05e-5"), mpf("4.4")
Rs = mpf(1000)
f = mpf("4e9")
w = 2 * pi * f
j = mpc(0, 1)
Cg = eps0 * er * A / d
Z = R + j * w * L + 1 / (j * w * Cs) + Rs / (1 + j * w * Cg * Rs)
print("z_real", Z.real)
print("z_imag", Z.imag)
