"""Small-time behaviour: compare leading-term formulas with exact kernel values.

The ratio exact/formula should drift to 1 like 1 + c t. Halving t and
combining the ratios removes the O(t) term (and then O(t^2)), which
exposes the leading constant directly. The published diagonal form is
shown next to the corrected one.

Run:  python3 demos/small_time.py      (about half a minute)
"""
from hopfheat import asymptotics as asy
from hopfheat import p_t_integral, p_t_spectral

ts = (0.04, 0.02, 0.01)


def table(label, formula, exact):
    rat = [exact(t) / formula(t) for t in ts]
    lim1 = 2 * rat[2] - rat[1]
    lim2 = (8 * rat[2] - 6 * rat[1] + rat[0]) / 3
    print(f"{label:<28}" + "  ".join(f"{x:.4f}" for x in rat) + f"   -> {lim1:.4f}  {lim2:.4f}")


print(f"{'':<28}{'t=0.04':<8}{'t=0.02':<8}{'t=0.01':<8}  extrapolated (O(t), O(t^2))")
table("diagonal n=1", lambda t: asy.p_asym_diagonal(1, t), lambda t: p_t_integral(1, t, 0.0, 0.0).value)
table("diagonal n=1 (published)", lambda t: asy.p_asym_diagonal(1, t, form="paper"),
      lambda t: p_t_integral(1, t, 0.0, 0.0).value)
table("horizontal n=1 r=0.8", lambda t: asy.p_asym_horizontal(1, t, 0.8),
      lambda t: p_t_integral(1, t, 0.8, 0.0).value)
table("general n=1 r=0.5 eta=1", lambda t: asy.p_asym_general(1, t, 0.5, 1.0),
      lambda t: p_t_spectral(1, t, 0.5, 1.0).value)

print("\nsub-Riemannian distance from the pole")
for r, eta in [(0.0, 3.141592653589793), (0.8, 0.0), (0.5, 1.0), (1.2, 2.5)]:
    print(f"  d({r}, {eta:.4f}) = {asy.subriemannian_distance(r, eta):.12f}")
