"""High-precision table of (1/2T)^2 sech^2(1/2T) on T = 0.05 + 0.95 i/99, i = 0..99.

Writes tests/data/thermal_benchmark.csv.
"""
import mpmath as mp

mp.mp.dps = 40

print("# T, (1/2T)^2 sech^2(1/2T) at omega0 = 1; mpmath, 40 digits")
for i in range(100):
    t = 0.05 + 0.95 * i / 99
    x = 1 / (2 * mp.mpf(t))
    print(f"{t!r},{mp.nstr(x**2 * mp.sech(x)**2, 20)}")
