"""Pick a backup-ready shift roster and compare the three solvers.

Four staff members cover four shifts.  Assignments marked fragile can
fall through on the day (illness, travel), and the roster we commit to
must still cover every shift after any single fragile assignment drops
out.  That is exactly a robust assignment instance: staff on one side,
shifts on the other, fragile pairs as vulnerable edges, hourly rates as
costs.
"""

from rapkit.ear import solve_ear
from rapkit.exact import lower_bounds, solve_exact
from rapkit.instance import make_instance, verify_solution
from rapkit.rounding import solve_lp_round

STAFF = ["ana", "bo", "cleo", "dev"]
SHIFTS = ["early", "day", "late", "night"]

# (staff, shift, rate, fragile) for every pairing that is possible at all
PAIRINGS = [
    ("ana", "early", 3, True),
    ("ana", "day", 4, False),
    ("bo", "early", 2, True),
    ("bo", "day", 5, True),
    ("bo", "late", 4, False),
    ("cleo", "day", 6, True),
    ("cleo", "late", 3, True),
    ("cleo", "night", 4, True),
    ("dev", "late", 5, True),
    ("dev", "night", 2, True),
    ("ana", "night", 6, False),
]


def build_instance():
    edges = []
    vulnerable = []
    costs = []
    for eid, (who, shift, rate, fragile) in enumerate(PAIRINGS):
        edges.append((STAFF.index(who), SHIFTS.index(shift)))
        costs.append(rate)
        if fragile:
            vulnerable.append(eid)
    return make_instance(len(STAFF), len(SHIFTS), edges, vulnerable, costs)


def describe(edge_ids):
    names = sorted(f"{PAIRINGS[e][0]}/{PAIRINGS[e][1]}" for e in edge_ids)
    return ", ".join(names)


def main():
    inst = build_instance()
    print(f"{len(PAIRINGS)} possible pairings, "
          f"{len(inst.vulnerable)} of them fragile")
    print(f"certified lower bound on any safe roster: {lower_bounds(inst)}")
    print()

    best = solve_exact(inst)
    cheap, _ = solve_lp_round(inst, seed=1)
    small = solve_ear(inst)
    for label, sol in (("exact", best), ("lp-round", cheap), ("ear", small)):
        cert = verify_solution(inst, sol)  # raises if the roster is unsafe
        print(f"{label:>8}: cost {sol.cost:g}, keeps {len(sol.edge_ids)} pairings")
        print(f"          {describe(sol.edge_ids)}")
        print(f"          certified against {len(cert.matchings)} scenarios")
    print()

    # show one concrete rescue: drop the cheapest fragile pairing we kept
    kept_fragile = sorted(best.edge_ids & inst.vulnerable)
    f = kept_fragile[0]
    cert = verify_solution(inst, best)
    backup = cert.matchings[f]
    who, shift, _, _ = PAIRINGS[f]
    print(f"if {who} misses the {shift} shift, fall back to: "
          f"{describe(backup)}")


if __name__ == "__main__":
    main()
