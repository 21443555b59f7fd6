"""
Maps, heuristics, and well-formedness
=====================================

Parse a small warehouse map, look at the precomputed distance tables, and
classify three instances: a valid one, one with too few parking endpoints,
and one whose endpoints block each other.
"""

from mapd import MapdInstance, check_well_formed, parse_map, precompute_heuristics

# Legend: '.' free, '@' blocked, 'e' task endpoint (pickup/delivery
# candidates), 'r' non-task endpoint (agent starts and parking).
GOOD = """\
2 5
e....
@re.r
"""

grid = parse_map(GOOD)
print("passable cells:", len(grid.passable))
print("task endpoints:", sorted(grid.task_endpoints))
print("parking endpoints:", sorted(grid.nontask_endpoints))

# Exact shortest-path distances from every cell to every endpoint, used as
# admissible heuristics by all planners.
h = precompute_heuristics(grid)
print("\ndistance (1,4) -> (0,0):", h.dist((1, 4), (0, 0)))
print("distance (1,1) -> (1,2):", h.dist((1, 1), (1, 2)))

# A well-formed instance: finite tasks, enough parking endpoints, and every
# endpoint pair connected without crossing a third endpoint.
instance = MapdInstance(grid=grid, agent_starts=[(1, 4), (1, 1)])
print("\nvalid instance:", check_well_formed(instance, []).ok)

# Two agents but a single parking endpoint: condition (b) fails.
few = parse_map("2 4\nr.ee\n....\n")
verdict = check_well_formed(MapdInstance(grid=few, agent_starts=[(0, 0), (0, 2)]), [])
for violation in verdict.violations:
    print("too few parking:", violation)

# A corridor of endpoints: every route between the outer task endpoints
# crosses the middle one, so condition (c) fails.
corridor = parse_map("1 7\nr.eee.r\n")
verdict = check_well_formed(MapdInstance(grid=corridor, agent_starts=[(0, 0), (0, 6)]), [])
print("corridor violations:", len(verdict.violations))
print("first:", verdict.violations[0])
