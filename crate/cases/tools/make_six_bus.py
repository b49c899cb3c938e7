"""Writes cases/six_bus.case: the classic six-bus, three-unit test system
split into two areas, with a hurricane crossing the 4-5 / 5-6 / 3-6 area
in the afternoon. Deterministic; rerun after editing the tables below."""
import math, pathlib

T = 24
SYSTEM_LOAD = [175.19, 165.15, 158.67, 154.73, 155.06, 160.48, 173.39, 177.60,
               186.81, 206.96, 228.61, 236.10, 242.18, 243.60, 248.86, 255.79,
               256.00, 246.74, 245.97, 237.35, 237.31, 232.67, 195.93, 195.60]
SHARE = {3: 0.2, 4: 0.4, 5: 0.4}
POS = {1: (0, 0), 2: (50, 0), 3: (100, 0), 4: (25, -40), 5: (75, -70), 6: (110, -40)}
AREA = {1: 1, 2: 1, 3: 1, 4: 2, 5: 2, 6: 2}
# (from, to, reactance p.u., rating MW)
BRANCHES = [(1, 2, 0.170, 200), (1, 4, 0.258, 100), (2, 4, 0.197, 100), (5, 6, 0.140, 100),
            (3, 6, 0.018, 100), (2, 3, 0.037, 100), (4, 5, 0.037, 100)]
# id, bus, pmax, pmin, a, b, start, ramp, r10, r5, min_up, min_down, u0, p0, init_up
GENS = [
    ("G1", 1, 220, 100, 13.51, 176.95, 100, 100, 30, 15, 4, 4, True, 165.19, 0),
    ("G2", 2, 100, 10, 32.63, 129.97, 200, 50, 25, 12, 2, 3, False, 0, 0),
    ("G3", 6, 20, 10, 17.70, 137.41, 0, 20, 10, 5, 1, 1, True, 10, 0),
]
VULNERABLE = {"L4-5", "L5-6", "L3-6"}


def fmt(v):
    return repr(float(v))


def main():
    out = []
    w = out.append
    w("# Six-bus, three-unit system in two areas ({1,2,3} and {4,5,6}) with a")
    w("# hurricane crossing the 4-5 / 5-6 / 3-6 corridor in the afternoon.")
    w("# Generated by cases/tools/make_six_bus.py.")
    w("")
    w("[system]")
    w('name = "six_bus"')
    w(f"horizon = {T}")
    w("dt_hours = 1.0")
    w("delta_r = 0.05")
    w("delta_r_plus = 0.02")
    w("delta_r_minus = 0.02")
    w("voll = 4000.0")
    w("vogc = 1000.0")
    for b in sorted(POS):
        w("")
        w("[[buses]]")
        w(f"id = {b}")
        w(f"area = {AREA[b]}")
    for (gid, bus, pmax, pmin, a, b, start, ramp, r10, r5, mu, md, u0, p0, iu) in GENS:
        w("")
        w("[[generators]]")
        w(f'id = "{gid}"')
        w(f"bus = {bus}")
        w(f"cost_a = {fmt(a)}")
        w(f"cost_b = {fmt(b)}")
        w(f"cost_start = {fmt(start)}")
        w(f"cost_shut = {fmt(0.0)}")
        w("cost_reserve = 2.0")
        w("cost_reg_up = 3.0")
        w("cost_reg_down = 3.0")
        w(f"p_min = {fmt(pmin)}")
        w(f"p_max = {fmt(pmax)}")
        w(f"ramp_up = {fmt(ramp)}")
        w(f"ramp_down = {fmt(ramp)}")
        w(f"ramp10_up = {fmt(r10)}")
        w(f"ramp5_up = {fmt(r5)}")
        w(f"ramp5_down = {fmt(r5)}")
        w(f"startup_ramp = {fmt(ramp)}")
        w(f"shutdown_ramp = {fmt(ramp)}")
        w(f"min_up = {mu}")
        w(f"min_down = {md}")
        w(f"u0 = {'true' if u0 else 'false'}")
        w(f"p0 = {fmt(p0)}")
    for (f, t, x, rate) in BRANCHES:
        w("")
        w("[[lines]]")
        w(f'id = "L{f}-{t}"')
        w(f"from = {f}")
        w(f"to = {t}")
        w(f"susceptance = {fmt(round(100.0 / x, 3))}")
        w(f"p_min = {fmt(-rate)}")
        w(f"p_max = {fmt(rate)}")
        w("repair_time = 6")
    for b in sorted(SHARE):
        w("")
        w("[[loads]]")
        w(f'id = "D{b}"')
        w(f"bus = {b}")
        w("demand = [" + ", ".join(fmt(round(v * SHARE[b], 3)) for v in SYSTEM_LOAD) + "]")
    w("")
    w("[hazard.track]")
    # Moving north-east, closest to bus 5 around slot 13.
    w("positions = [" + ", ".join(f"[{fmt(-40 + 9 * t)}, {fmt(-190 + 9 * t)}]" for t in range(T)) + "]")
    w("peak_wind = [" + ", ".join(fmt(45.0) for _ in range(T)) + "]")
    w("peak_rain = [" + ", ".join(fmt(30.0) for _ in range(T)) + "]")
    w("decay_km = 50.0")
    w("cutoff_km = 90.0")
    for (f, t, _, _) in BRANCHES:
        lid = f"L{f}-{t}"
        (x1, y1), (x2, y2) = POS[f], POS[t]
        mx, my = (x1 + x2) / 2, (y1 + y2) / 2
        length = max(1.0, math.hypot(x2 - x1, y2 - y1))
        mu = 38.0 if lid in VULNERABLE else 70.0
        w("")
        w("[[hazard.assets]]")
        w(f'line = "{lid}"')
        w(f"towers = [{{ x_km = {fmt(mx)}, y_km = {fmt(my)}, mu = {fmt(mu)}, sigma = 5.0 }}]")
        w(f"segments = [{{ x_km = {fmt(mx)}, y_km = {fmt(my)}, length_km = {fmt(round(length, 1))}, "
          f"a = 2.0, b = 1.0, c = -14.0, design_wind = 50.0, design_rain = 50.0 }}]")
    w("")
    w("[uncertainty]")
    w("pi_threshold = 0.01")
    w("k = 2")
    w("")
    w("[solver]")
    w('subproblem = "bounded"')
    path = pathlib.Path(__file__).resolve().parents[1] / "six_bus.case"
    path.write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
