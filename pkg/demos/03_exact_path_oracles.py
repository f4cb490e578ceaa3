"""Exact reference paths vs Euler-Maruyama on shared Brownian noise.

Three regimes admit exact constructions of the optimal state process:
  d = 0   lognormal-type formula with a trapezoid time integral,
  c = 0   Ornstein-Uhlenbeck recursion with exact Gaussian transitions,
  both nonzero   Doss-Saussmann transform X = F(W, Y).
Because every path owns a counter-based stream, the exact batch and the
Euler batch see the same increments, so their endpoint gap is a strong
discretization error that must shrink as dt does.
"""

import math

import exploratory_lq as xlq

D0 = xlq.LqModel(a=0.2, b=1, c=0.8, d=0, m=0, n=1, r=0, p=0, q=-0.5,
                 rho=2, lam=0.3)
C0 = xlq.LqModel(a=-1, b=1, c=0, d=1, m=0, n=2, r=0, p=0, q=1,
                 rho=0.5, lam=1.0)
DS = xlq.LqModel(a=0, b=1, c=0.5, d=1, m=1, n=2, r=0, p=0, q=0,
                 rho=3, lam=0.2)


def ladder(model, method):
    if method == "doss_saussman":
        value, policy = xlq.exploratory_solution(model)
    else:
        value = None
        policy = xlq.AffineGaussianPolicy(0.0, -model.q / model.n,
                                          model.lam / model.n)
    errs = []
    for dt in (1e-2, 1e-3, 1e-4):
        grid = xlq.PathGrid(dt=dt, n_steps=int(round(1.0 / dt)))
        em = xlq.simulate_exploratory(model, policy, 1.0, grid, seed=99,
                                      n_paths=200, record_paths=False)
        ex = xlq.exact_batch(model, 1.0, grid, 99, 200, method=method,
                             value=value)
        errs.append(xlq.endpoint_rms_error(em, ex))
    order = math.log10(errs[0] / errs[2]) / 2
    print(f"{method:>14}: rms " + " -> ".join(f"{e:.3e}" for e in errs)
          + f"   empirical order {order:.2f}")


print("strong RMS endpoint error, dt = 1e-2 -> 1e-3 -> 1e-4")
ladder(D0, "d0")
ladder(C0, "c0")
ladder(DS, "doss_saussman")

# The transform F satisfies dF/dz = sqrt((c1t F + c2t)^2 + dt_var).
value, _ = xlq.exploratory_solution(DS)
tr = xlq.DossSaussmanTransform.from_solution(DS, value)
z, y = 0.8, -1.1
h = 1e-6
fd = (tr.f(z + h, y) - tr.f(z - h, y)) / (2 * h)
print("\nF'(z) by finite differences:", fd)
print("sqrt((c1t F + c2t)^2 + dt_var):",
      math.sqrt((tr.c1t * tr.f(z, y) + tr.c2t) ** 2 + tr.dt_var))
