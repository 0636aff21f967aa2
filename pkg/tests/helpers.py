"""Independent oracles and instance generators shared by the test modules.

The formula evaluators below compute the penalty functions straight from
on/start/gen values with plain arithmetic; they never touch the expansion
code in ``ucpq._expr``.
"""
import itertools

import numpy as np

from ucpq.instance import UcpInstance, UnitSpec, step_count
from ucpq.tailored import encoding_weights

OPTIMUM = "01111011010110000100"
RUNNER_UP = "01110111010110001000"

# (criterion, passed, detail) rows printed in the terminal summary
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def bits(s: str) -> list[int]:
    return [int(c) for c in s]


def random_instance(rng: np.random.Generator, max_T=4, max_I=2, discrete=False) -> UcpInstance:
    T = int(rng.integers(1, max_T + 1))
    I = int(rng.integers(1, max_I + 1))
    units = []
    for i in range(I):
        g = int(rng.integers(1, 4))
        kw = {}
        lo = g
        if discrete:
            lo = int(rng.integers(0, 3))
            g = lo + int(rng.integers(1, 4))
            kw["step_size"] = 1
        units.append(
            UnitSpec(
                f"u{i}", lo, g,
                min_up=int(rng.integers(1, 4)),
                min_down=int(rng.integers(1, 4)),
                start_cost=int(rng.integers(0, 61)),
                var_cost=int(rng.integers(0, 51)),
                initial_on=bool(rng.integers(0, 2)),
                **kw,
            )
        )
    cap = [u.max_gen for u in units]
    rd = []
    for _ in range(T):
        if rng.random() < 0.8:
            mask = rng.integers(0, 2, I)
            rd.append(float(sum(c for c, m in zip(cap, mask) if m)))
        else:
            rd.append(float(rng.integers(0, sum(cap) + 2)))
    return UcpInstance(f"rand-{T}x{I}", T, tuple(units), tuple(rd))


def suite(n: int, seed: int = 20221, **kw) -> list[UcpInstance]:
    rng = np.random.default_rng(seed)
    return [random_instance(rng, **kw) for _ in range(n)]


def all_bits(n: int) -> np.ndarray:
    """All 2**n bit vectors, row k = binary digits of k (bit 0 first)."""
    k = np.arange(1 << n, dtype=np.int64)
    return ((k[:, None] >> np.arange(n)) & 1).astype(np.float64)


def dense_energies(q, X: np.ndarray) -> np.ndarray:
    """x^T Q x + offset for every row of X, by dense linear algebra."""
    U = q.to_dense()
    return np.einsum("ij,jk,ik->i", X, U, X) + q.offset


def cost_vector(inst, layout) -> np.ndarray:
    """Linear objective per variable (on and start bits; generation bits via step size)."""
    c = np.zeros(layout.total)
    for t in range(inst.time_steps):
        for i, u in enumerate(inst.units):
            c[layout.start(t, i)] = u.start_cost
            if u.discrete:
                c[layout.on(t, i)] = u.var_cost * u.min_gen
                for k, w in enumerate(encoding_weights(step_count(u))):
                    c[layout.gen(t, i, k)] = u.var_cost * u.step_size * w
            else:
                c[layout.on(t, i)] = u.var_cost * u.max_gen
    return c


def _prev(inst, on, t, i):
    return on[t - 1][i] if t > 0 else int(inst.units[i].initial_on)


def power(inst, on, steps, t, i):
    u = inst.units[i]
    if u.step_size is None:
        return u.max_gen * on[t][i]
    return u.min_gen * on[t][i] + steps[t][i] * u.step_size


def objective(inst, on, start, steps):
    return sum(
        u.var_cost * power(inst, on, steps, t, i) + u.start_cost * start[t][i]
        for t in range(inst.time_steps)
        for i, u in enumerate(inst.units)
    )


def tailored_penalty(inst, p, on, start, steps=None, genbits=None, literal=False):
    """A/B/C/D (+ coupling) penalty of the tailored formulation, evaluated directly."""
    T, I = inst.time_steps, inst.n_units
    steps = steps or [[0] * I for _ in range(T)]
    total = 0
    for t in range(T):
        total += p.A * (sum(power(inst, on, steps, t, i) for i in range(I))
                        - inst.residual_demand[t]) ** 2
        for i, u in enumerate(inst.units):
            o, s, pv = on[t][i], start[t][i], _prev(inst, on, t, i)
            total += p.B * (o * (1 - pv) + 2 * s * (pv + 1 - o) - s)
            up = range(t, min(t + u.min_up, T))
            total += p.C * (s * len(up) - sum(s * on[tau][i] for tau in up))
            lo = t if literal else t + 1
            total += p.D * sum((s + pv - o) * on[tau][i] for tau in range(lo, min(t + u.min_down, T)))
            if genbits is not None:
                total += p.A * (1 - o) * sum(genbits[t][i])
    return total


def generic_penalty(inst, p, on, start, sl_start, sl_up, sl_down):
    """Squared slack-equality penalties of the generic formulation."""
    T = inst.time_steps
    total = 0
    for t in range(T):
        total += p.A * (sum(u.max_gen * on[t][i] for i, u in enumerate(inst.units))
                        - inst.residual_demand[t]) ** 2
        for i, u in enumerate(inst.units):
            pv = _prev(inst, on, t, i)
            total += p.B * (start[t][i] - (on[t][i] - pv + sl_start[t][i])) ** 2
            up = range(t, min(t + u.min_up, T))
            total += p.C * (sum(on[tau][i] for tau in up) - start[t][i] * len(up) - sl_up[t][i]) ** 2
            md = u.min_down
            back = on[t - md][i] if t - md >= 0 else int(u.initial_on)
            starts = sum(start[tau][i] for tau in range(max(0, t - md + 1), t + 1))
            total += p.D * (1 - back - starts - sl_down[t][i]) ** 2
    return total


def encodings(unit, level_steps: int) -> int:
    """How many bit patterns of the unit's step encoding sum to level_steps."""
    w = encoding_weights(step_count(unit))
    return sum(1 for bits in itertools.product((0, 1), repeat=len(w))
               if sum(a * b for a, b in zip(w, bits)) == level_steps)
