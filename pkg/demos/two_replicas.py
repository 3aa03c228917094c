"""
One file, two replicas
======================

A file F is held by Site_1 and Site_2. Each site can send it straight to
Dest, and Site_1 could also hand it to Site_2 first. The solver picks a
single origin and a single path; routing variables of unused links stay at
zero.
"""
from pathlib import Path

from gridplan import ModelConfig, build_model, load_network, load_request, solve
from gridplan.network import Demand, Request

data = Path(__file__).parent / "data"
network = load_network(data / "two_replicas_network.json")
request = load_request(data / "two_replicas_request.json", network)

model = build_model(network, request, ModelConfig(allow_transit=True))
# link c is never a candidate: it would carry F into a site that already has it
print("candidates:", [(v.demand, v.link) for v in model.routing_vars])

schedule, report = solve(model)
for e in schedule.entries:
    print(f"  {e.demand} over {e.link}: {e.start} -> {e.end}")
print("makespan", schedule.makespan, "proven optimal:", report.proven_optimal)

# with F only at Site_1 the detour c, b is a real alternative, but slower than a
only_one = Request("Dest", (Demand("F", frozenset({"Site_1"})),))
model = build_model(network, only_one, ModelConfig(allow_transit=True))
print("candidates:", [(v.demand, v.link) for v in model.routing_vars])
print("makespan", solve(model)[0].makespan)
