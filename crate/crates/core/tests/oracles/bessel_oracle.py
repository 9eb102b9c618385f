"""Reference values for J_n and Y_n, computed with mpmath at 50 digits.

Regenerate with `python3 bessel_oracle.py > bessel_values.txt`.
Each line: order x J_n(x) Y_n(x) (Y column is 'nan' when out of f64 range).
"""
import mpmath as mp

mp.mp.dps = 50
orders = [0, 1, 2, 3, 5, 8, 13, 20, 30, 50, 80, 120, 200]
xs = ["0.001", "0.01", "0.1", "0.5", "1", "2.5", "4.2", "7.5", "10", "16.3",
      "25", "35.7", "50", "64.1", "77.7", "100"]
for n in orders:
    for xs_ in xs:
        x = mp.mpf(xs_)
        j = mp.besselj(n, x)
        y = mp.bessely(n, x)
        if abs(j) < mp.mpf("1e-290"):
            continue
        ys = mp.nstr(y, 20) if abs(y) < mp.mpf("1e290") else "nan"
        print(n, xs_, mp.nstr(j, 20), ys)
