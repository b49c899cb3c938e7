"""Writes cases/rts24_like.case: an IEEE RTS-24 topology analog with a
hurricane crossing the 11-14 / 14-16 corridor. Deterministic; rerun after
editing the tables below."""
import math, pathlib

T = 24
PROFILE = [0.67, 0.63, 0.60, 0.59, 0.59, 0.60, 0.74, 0.86, 0.95, 0.96, 0.96, 0.95,
           0.95, 0.95, 0.93, 0.94, 0.99, 1.00, 1.00, 0.96, 0.91, 0.83, 0.73, 0.63]
SCALE = 0.8
POS = {1: (0, 0), 2: (40, 0), 3: (0, 40), 4: (30, 30), 5: (60, 20), 6: (80, 0),
       7: (100, 10), 8: (90, 40), 9: (40, 60), 10: (70, 60), 11: (40, 90),
       12: (80, 90), 13: (110, 100), 14: (30, 120), 15: (0, 160), 16: (40, 150),
       17: (40, 190), 18: (30, 220), 19: (80, 160), 20: (100, 170), 21: (0, 210),
       22: (20, 240), 23: (120, 140), 24: (0, 100)}
AREA = {b: (1 if b <= 10 else 2) for b in POS}
# (from, to, reactance p.u. on 100 MVA, rating MW)
BRANCHES = [
    (1, 2, 0.0139, 175), (1, 3, 0.2112, 175), (1, 5, 0.0845, 175), (2, 4, 0.1267, 175),
    (2, 6, 0.1920, 175), (3, 9, 0.1190, 175), (3, 24, 0.0839, 400), (4, 9, 0.1037, 175),
    (5, 10, 0.0883, 175), (6, 10, 0.0605, 175), (7, 8, 0.0614, 200), (8, 9, 0.1651, 175),
    (8, 10, 0.1651, 175), (9, 11, 0.0839, 400), (9, 12, 0.0839, 400), (10, 11, 0.0839, 400),
    (10, 12, 0.0839, 400), (11, 13, 0.0476, 500), (11, 14, 0.0418, 500), (12, 13, 0.0476, 500),
    (12, 23, 0.0966, 500), (13, 23, 0.0865, 500), (14, 16, 0.0389, 500), (15, 16, 0.0173, 500),
    (15, 21, 0.0490, 500), (15, 21, 0.0490, 500), (15, 24, 0.0519, 500), (16, 17, 0.0259, 500),
    (16, 19, 0.0231, 500), (17, 18, 0.0144, 500), (17, 22, 0.1053, 500), (18, 21, 0.0259, 500),
    (18, 21, 0.0259, 500), (19, 20, 0.0396, 500), (19, 20, 0.0396, 500), (20, 23, 0.0216, 500),
    (20, 23, 0.0216, 500), (21, 22, 0.0678, 500),
]
LOADS = {1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 170, 8: 171, 9: 175, 10: 195,
         13: 265, 14: 120, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128}
# id, bus, pmax, pmin, a, b, start, ramp(MW/h), min_up, min_down, u0, p0
GENS = [
    ("G1", 1, 192, 40, 28.0, 250, 1200, 100, 2, 2, False, 0),
    ("G2", 2, 192, 40, 28.0, 250, 1200, 100, 2, 2, False, 0),
    ("G7", 7, 300, 50, 48.0, 400, 2500, 120, 3, 3, False, 0),
    ("G13", 13, 591, 150, 22.0, 500, 4000, 200, 4, 4, True, 300),
    ("G15", 15, 215, 50, 26.0, 200, 1000, 120, 2, 2, True, 120),
    ("G16", 16, 155, 50, 15.0, 150, 1500, 80, 4, 4, True, 120),
    ("G18", 18, 400, 300, 6.0, 300, 20000, 100, 8, 8, True, 380),
    ("G21", 21, 700, 150, 5.0, 250, 8000, 250, 4, 4, True, 350),
    ("G23", 23, 660, 200, 14.0, 400, 6000, 220, 6, 6, True, 260),
]
CORRIDOR = {"L11-14", "L14-16"}
REPAIR_TIME = 4


def line_ids():
    seen = {}
    out = []
    for f, t, _, _ in BRANCHES:
        base = f"L{f}-{t}"
        seen[base] = seen.get(base, 0) + 1
        out.append(base if seen[base] == 1 else f"{base}b")
    return out


def fmt(v):
    return repr(float(v))


def main():
    out = []
    w = out.append
    w("# IEEE RTS-24 topology analog (38 branches, 2 areas) with a hurricane")
    w("# crossing the 11-14 / 14-16 corridor from slot 15. Generated by")
    w("# cases/tools/make_rts24_like.py.")
    w("")
    w("[system]")
    w('name = "rts24_like"')
    w(f"horizon = {T}")
    w("dt_hours = 1.0")
    w("delta_r = 0.05")
    w("delta_r_plus = 0.01")
    w("delta_r_minus = 0.01")
    w("voll = 4000.0")
    w("vogc = 1000.0")
    for b in sorted(POS):
        w("")
        w("[[buses]]")
        w(f"id = {b}")
        w(f"area = {AREA[b]}")
    for (gid, bus, pmax, pmin, a, b, start, ramp, mu, md, u0, p0) in GENS:
        w("")
        w("[[generators]]")
        w(f'id = "{gid}"')
        w(f"bus = {bus}")
        w(f"cost_a = {fmt(a)}")
        w(f"cost_b = {fmt(b)}")
        w(f"cost_start = {fmt(start)}")
        w(f"cost_shut = {fmt(start * 0.1)}")
        w("cost_reserve = 3.0")
        w("cost_reg_up = 4.0")
        w("cost_reg_down = 4.0")
        w(f"p_min = {fmt(pmin)}")
        w(f"p_max = {fmt(pmax)}")
        w(f"ramp_up = {fmt(ramp)}")
        w(f"ramp_down = {fmt(ramp)}")
        w(f"ramp10_up = {fmt(round(pmax * 0.15))}")
        w(f"ramp5_up = {fmt(round(pmax * 0.08))}")
        w(f"ramp5_down = {fmt(round(pmax * 0.08))}")
        w(f"startup_ramp = {fmt(min(ramp, max(pmin, ramp)))}")
        w(f"shutdown_ramp = {fmt(min(ramp, max(pmin, ramp)))}")
        w(f"min_up = {mu}")
        w(f"min_down = {md}")
        w(f"u0 = {'true' if u0 else 'false'}")
        w(f"p0 = {fmt(p0)}")
    ids = line_ids()
    for lid, (f, t, x, rate) in zip(ids, BRANCHES):
        w("")
        w("[[lines]]")
        w(f'id = "{lid}"')
        w(f"from = {f}")
        w(f"to = {t}")
        w(f"susceptance = {fmt(round(100.0 / x, 3))}")
        w(f"p_min = {fmt(-rate)}")
        w(f"p_max = {fmt(rate)}")
        w(f"repair_time = {REPAIR_TIME}")
    for b in sorted(LOADS):
        w("")
        w("[[loads]]")
        w(f'id = "D{b}"')
        w(f"bus = {b}")
        dem = [round(LOADS[b] * SCALE * p, 2) for p in PROFILE]
        w("demand = [" + ", ".join(fmt(v) for v in dem) + "]")
    w("")
    w("[hazard.track]")
    w("positions = [" + ", ".join(f"[{fmt(-200 + 16 * t)}, 120.0]" for t in range(T)) + "]")
    w("peak_wind = [" + ", ".join(fmt(45.0) for _ in range(T)) + "]")
    w("peak_rain = [" + ", ".join(fmt(30.0) for _ in range(T)) + "]")
    w("decay_km = 60.0")
    w("cutoff_km = 80.0")
    for lid, (f, t, _, _) in zip(ids, BRANCHES):
        (x1, y1), (x2, y2) = POS[f], POS[t]
        mx, my = (x1 + x2) / 2, (y1 + y2) / 2
        length = max(1.0, math.hypot(x2 - x1, y2 - y1))
        mu = 40.0 if lid in CORRIDOR else 70.0
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
    w("enumeration_cap = 1000000")
    path = pathlib.Path(__file__).resolve().parents[1] / "rts24_like.case"
    path.write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
