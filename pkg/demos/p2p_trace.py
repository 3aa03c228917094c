"""
The peer-to-peer baseline
=========================

Each link into the destination has an observer. When its link is free the
observer takes the rarest file its source still lists; ties are broken by a
seeded generator, so the trace below is the same on every run.
"""
from gridplan import build_model, simulate, solve
from gridplan.bench import ScenarioSpec, generate
from gridplan.p2p import format_trace

spec = ScenarioSpec("weighted", n_files=8, seed=3)
request = generate(spec)
for d in request.demands:
    print(d.name, sorted(d.origins))

schedule, trace = simulate(spec.network, request, seed=3)
print(format_trace(trace))

optimum = solve(build_model(spec.network, request))[0].makespan
print(f"p2p makespan {schedule.makespan}, optimal {optimum}")
