"""
Links behind one router
=======================

S1 and S2 both connect to the destination through the same router. A shared
group caps the summed consumption of the transfers running on its members;
each transfer consumes its link's slowdown.
"""
from gridplan import ModelConfig, Network, SharedLinkGroup, build_model, solve
from gridplan.network import Demand, Request, make_star

star = make_star([1, 1, 3])
request = Request("dest", tuple(Demand(f"f{i}", frozenset({"S1", "S2", "S3"})) for i in range(4)))

for capacity in (1, 2):
    network = Network(star.sites, star.links, (SharedLinkGroup(("S1-dest", "S2-dest"), capacity),))
    schedule, _ = solve(build_model(network, request, ModelConfig(enforce_shared_groups=True)))
    print(f"router capacity {capacity}: makespan {schedule.makespan}")
    for e in schedule.entries:
        print(f"  {e.demand} {e.link} {e.start}-{e.end}")

# capacity 1 behaves like a single fast link, capacity 2 like no router at all
