"""
Storage at a transit site
=========================

Two files travel through Site_3 on their way to Site_4. Site_3 can hold one
file at a time. Without the storage limit both files sit at Site_3
together; with it, the second file may only arrive once the first one has
left.
"""
from pathlib import Path

from gridplan import ModelConfig, build_model, load_network, load_request, solve
from gridplan.gantt import build_gantt, to_ascii

data = Path(__file__).parent / "data"
network = load_network(data / "funnel_network.json")
request = load_request(data / "funnel_request.json", network)

for enforce in (False, True):
    cfg = ModelConfig(allow_transit=True, enforce_storage=enforce)
    schedule, report = solve(build_model(network, request, cfg))
    print(f"storage enforced: {enforce}, makespan {schedule.makespan}")
    print(to_ascii(build_gantt(schedule, network, request, storage_lanes=True)))

# the storage lane of the second chart shows A and B one after the other
