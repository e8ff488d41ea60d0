import random

from conezeta import rings
from conezeta.conditions import ring_cone_data
from conezeta.cone import build_cone, cone_from_inequalities

BUILTIN_CONES = [("zd(1)", "subring"), ("zd(2)", "subring"), ("zd(3)", "subring"),
                 ("zd(4)", "subring"), ("heisenberg", "subring"), ("heisenberg", "ideal")]


def builtin_cones():
    out = []
    for name, kind in BUILTIN_CONES:
        data = ring_cone_data(rings.builtin(name), kind)
        out.append((f"{name}-{kind}", data, build_cone(data)))
    return out


def random_cones(count=25, seed=20240611):
    """Cones with t <= 4, at most 3 inequalities, entries in [-3, 3], not just the origin."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        t = rng.randint(2, 4)
        k = rng.randint(1, 3)
        ineqs = [tuple(rng.randint(-3, 3) for _ in range(t)) for _ in range(k)]
        f0 = [rng.randint(0, 2) for _ in range(t)]
        if not any(f0):
            f0[0] = 1
        g0 = [rng.randint(0, 2) for _ in range(t)]
        cs = cone_from_inequalities(t, ineqs, f0, g0)
        if cs.rays:
            out.append(cs)
    return out



# acceptance lines are collected here and shown in the terminal summary
_ACCEPTANCE = "_acceptance_lines"


def record(config, k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    print(line)
    lines = getattr(config, _ACCEPTANCE, None)
    if lines is None:
        lines = []
        setattr(config, _ACCEPTANCE, lines)
    lines.append((k, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, _ACCEPTANCE, None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
