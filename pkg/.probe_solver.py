import sys, math, time
sys.path.insert(0, "src")
import numpy as np
from fuzzyfrac.scenario import make_scenario
from fuzzyfrac.solver import solve_caputo, solve_delay, solve_stochastic, exact_linear
from fuzzyfrac.fuzzy import crisp, triangular
from fuzzyfrac.mlf import ml_one

# 1. convergence order vs exact_linear for D^q u = -u on [0,1]
print("== convergence order (max error over [0,1]) ==")
for q in (0.3, 0.5, 0.8):
    errs = []
    hs = [2.0**-k for k in (7, 8, 9, 10)]
    for h in hs:
        scn = make_scenario(q=q, horizon=1.0, step=h, initial={"crisp": 1.0}, rhs="-u")
        traj = solve_caputo(scn)
        ref = exact_linear([[-1.0]], crisp(1.0), q, traj.times)
        err = np.max(np.abs(traj.norms - ref.norms))
        errs.append(err)
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    # regression slope
    slope = np.polyfit(np.log2(hs), np.log2(errs), 1)[0]
    print(f"q={q}: errs={['%.3e' % e for e in errs]} orders={['%.3f' % o for o in orders]} slope={slope:.3f} target>={1+q-0.2:.2f}")

# 2. memory kernel: f = c constant
q, c, T, h = 0.6, 0.8, 2.0, 0.01
scn = make_scenario(q=q, horizon=T, step=h, initial={"crisp": 0.5}, rhs="0*u + 0.8")
traj = solve_caputo(scn)
exact = 0.5 + c * T**q / math.gamma(q + 1)
print("memory kernel:", traj.norms[-1], exact, "diff", abs(traj.norms[-1] - exact))

# 3. value check at t=1 for q=0.5
scn = make_scenario(q=0.5, horizon=1.0, step=1/512, initial={"crisp": 1.0}, rhs="-u")
traj = solve_caputo(scn)
print("u(1) for q=0.5:", traj.norms[-1], "exact", ml_one(0.5, -1.0), "diff", abs(traj.norms[-1]-ml_one(0.5,-1.0)))

# 4. delay degenerate == plain (bitwise)
scn_d = make_scenario(q=0.7, horizon=2.0, step=1/64, initial={"crisp": 1.0}, rhs="-u",
                      delay_tau=0.5, delay_history="1")
scn_p = make_scenario(q=0.7, horizon=2.0, step=1/64, initial={"crisp": 1.0}, rhs="-u")
td = solve_delay(scn_d).from_zero()
tp = solve_caputo(scn_p)
same = all(np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)
           for a, b in zip(td.states, tp.states))
print("degenerate delay bitwise equal:", same)

# 5. delay demo decay vs envelope 1.25*E_{0.7}(-1.2 t^0.7)
scn = make_scenario(q=0.7, horizon=8.0, step=1/128, initial={"crisp": 1.0},
                    rhs="-2*u + 0.5*ud", delay_tau=0.5, delay_history="1")
traj = solve_delay(scn).from_zero()
env = np.array([1.25 * ml_one(0.7, -1.2 * t**0.7) if t > 0 else 1.25 for t in traj.times])
margin = env - traj.norms
print("delay envelope min margin:", margin.min(), "at t =", traj.times[margin.argmin()], "max norm", traj.norms.max())

# 6. stochastic: moments under bound
t0 = time.time()
scn = make_scenario(q=0.5, horizon=10.0, step=0.01, initial={"crisp": 1.0}, rhs="-u",
                    noise_sigma=0.1, noise_paths=2000, noise_seed=42)
mt = solve_stochastic(scn, a=2.0)
el = time.time() - t0
kappa = 2.0
bound = np.array([1.0 * ml_one(0.5, -kappa * t**0.5) if t > 0 else 1.0 for t in mt.times])
bound = bound + (0.01 / kappa) * (1 - bound / 1.0)  # w0=1: E + (beta/kappa)(1-E)
ok = mt.moment <= bound + 3 * mt.stderr
print(f"stochastic: all under bound: {ok.all()} (min slack {np.min(bound + 3*mt.stderr - mt.moment):.5f}) time {el:.1f}s")
print("  terminal moment", mt.moment[-1], "bound", bound[-1], "stderr", mt.stderr[-1])

# 7. vector Metzler + triangular
A = [[-1.0, 0.4], [0.4, -1.0]]
scn = make_scenario(q=0.6, horizon=20.0, step=0.01, matrix=A,
                    initial=[{"triangular": [0.8, 1.0, 1.2]}, {"triangular": [0.4, 0.5, 0.6]}])
t0 = time.time()
traj = solve_caputo(scn)
print("2x2 Metzler ok, norm0=%.4f normT=%.4f, %.2fs" % (traj.norms[0], traj.norms[-1], time.time()-t0))
