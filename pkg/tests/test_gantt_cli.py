import csv
import io
import json

import pytest

from gridplan.cli import main
from gridplan.gantt import build_gantt, to_ascii, to_svg
from gridplan.network import (Schedule, ScheduleEntry, make_star, network_to_dict, request_to_dict,
                              schedule_from_csv)
from gridplan.replay import replay
from gridplan.solver import ModelConfig, build_model, solve

from conftest import funnel, funnel_request, shared_request


@pytest.fixture
def files(tmp_path, two_replicas):
    def write(net, req, stem="x"):
        n, r = tmp_path / f"{stem}_net.json", tmp_path / f"{stem}_req.json"
        n.write_text(json.dumps(network_to_dict(net)))
        r.write_text(json.dumps(request_to_dict(req)))
        return str(n), str(r)
    write.tmp = tmp_path
    write.two_replicas = write(*two_replicas, stem="two_replicas")
    return write


def test_plan_two_replicas(files, capsys):
    net, req = files.two_replicas
    assert main(["plan", net, req, "--method", "optimal", "--transit"]) == 0
    out, err = capsys.readouterr()
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["demand", "link", "from", "to", "start", "end"]
    assert rows[1:] == [["F", "a", "Site_1", "Dest", "0", "2"]]
    report = json.loads(err)
    assert report["proven_optimal"] and report["makespan"] == 2


def test_plan_writes_files(files):
    net, req = files(make_star([1, 2]), shared_request(3, ["S1", "S2"]))
    out, rep = files.tmp / "s.csv", files.tmp / "r.json"
    assert main(["plan", net, req, "--method", "chunked", "--chunk-size", "1", "--out", str(out),
                 "--report", str(rep)]) == 0
    assert schedule_from_csv(out.read_text()).makespan == 2
    assert len(json.loads(rep.read_text())) == 3


def test_plan_timelimited_budget_exit(files, capsys):
    net, req = files(make_star([1, 2]), shared_request(3, ["S1", "S2"]))
    assert main(["plan", net, req, "--method", "timelimited", "--time-coeff", "0"]) == 3
    assert json.loads(capsys.readouterr().err)["status"] == "budget"


def test_plan_infeasible_exit(files, capsys):
    net, req = files(funnel(), funnel_request())
    assert main(["plan", net, req]) == 2
    assert "infeasible" in capsys.readouterr().err


def test_p2p_rejects_transit(files, capsys):
    net, req = files.two_replicas
    assert main(["plan", net, req, "--method", "p2p", "--transit"]) == 1
    assert "P2P requires direct connections" in capsys.readouterr().err


def test_plan_p2p_and_simulate_agree(files, capsys):
    net, req = files(make_star([1, 1, 2]), shared_request(5, ["S1", "S2", "S3"]))
    assert main(["plan", net, req, "--method", "p2p", "--seed", "3"]) == 0
    a = capsys.readouterr()
    assert main(["simulate", net, req, "--seed", "3"]) == 0
    b = capsys.readouterr()
    assert a == b
    assert a.err.splitlines()[0].startswith("t=0 link=")


def test_chunk_one_matches_optimal_through_cli(files, capsys):
    net, req = files(make_star([1, 2, 4]), shared_request(4, ["S1", "S2", "S3"]))
    spans = []
    for extra in ([], ["--method", "chunked", "--chunk-size", "1"]):
        assert main(["plan", net, req, *extra]) == 0
        spans.append(schedule_from_csv(capsys.readouterr().out).makespan)
    assert spans[0] == spans[1]


def test_roundtrip_plan_gantt(files, capsys):
    net_p, req_p = files(funnel(1), funnel_request())
    out = files.tmp / "s.csv"
    assert main(["plan", net_p, req_p, "--transit", "--storage", "--out", str(out)]) == 0
    sched = schedule_from_csv(out.read_text())
    assert replay(sched, funnel(1), funnel_request()) is None
    assert sched.makespan == 4
    svg = files.tmp / "g.svg"
    args = ["gantt", str(out), net_p, "--request", req_p, "--storage", "--storage-lanes", "--out", str(svg)]
    assert main(args) == 0
    first = svg.read_bytes()
    assert main(args) == 0
    assert svg.read_bytes() == first
    assert b"Site_3 storage cap=1" in first


def test_gantt_refuses_bad_schedule(files, capsys):
    net_p, req_p = files(make_star([2]), shared_request(2, ["S1"]))
    bad = files.tmp / "bad.csv"
    bad.write_text("demand,link,from,to,start,end\nf0,S1-dest,S1,dest,0,2\nf1,S1-dest,S1,dest,1,3\n")
    assert main(["gantt", str(bad), net_p, "--request", req_p]) == 1
    assert "overlap" in capsys.readouterr().err


def test_funnel_storage_lane_serialized():
    sched, _ = solve(build_model(funnel(1), funnel_request(), ModelConfig(allow_transit=True, enforce_storage=True)))
    doc = build_gantt(sched, funnel(1), funnel_request(), storage_lanes=True)
    lane = [r for r in doc.rows if r.kind == "storage"][0]
    bars = sorted(lane.bars, key=lambda b: b.start)
    assert lane.lanes == 1 and len(bars) == 2
    assert bars[0].end <= bars[1].start


def test_empty_chart_has_axes():
    doc = build_gantt(Schedule(()), make_star([1]))
    svg = to_svg(doc)
    assert svg.startswith("<svg") and "<line" in svg and ">0</text>" in svg
    assert all(not r.bars for r in doc.rows)


def test_two_file_chart():
    s = Schedule((ScheduleEntry("f0", "S1-dest", 0, 2), ScheduleEntry("f1", "S1-dest", 2, 4)))
    doc = build_gantt(s, make_star([2]))
    (row,) = doc.rows
    assert len(row.bars) == 2 and row.bars[0].end <= row.bars[1].start
    assert to_ascii(doc).splitlines()[0].endswith("|0011|")


def test_validate_ok_and_malformed(files, tmp_path, capsys):
    net, req = files.two_replicas
    assert main(["validate", net, req]) == 0
    assert "ok" in capsys.readouterr().out
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"sites": [{"id": "A"}], "links": [{"id": "l", "from": "A", "to": "A",
                                                                      "slowdwn": 1}]}))
    assert main(["validate", str(broken)]) == 1
    assert "slowdwn" in capsys.readouterr().err


def test_validate_reports_unreachable(files, capsys):
    net, req = files(funnel(), funnel_request())
    # with transit Site_4 is reachable, so the network itself validates
    assert main(["validate", net, req]) == 0


def test_bench_csv(tmp_path, capsys):
    spec = tmp_path / "w.json"
    spec.write_text(json.dumps({"case": "weighted", "n_files": [2, 4, 8], "reps": 1}))
    assert main(["bench", str(spec), "--methods", "optimal,p2p", "--max-files", "4"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert {r["n_files"] for r in rows} == {"2", "4"}
    p2p = [r for r in rows if r["method"] == "p2p"]
    assert p2p and all(r["loss_pct"] != "" and float(r["loss_pct"]) >= 0 for r in p2p)


def test_missing_file_is_input_error(capsys):
    assert main(["validate", "/nonexistent/net.json"]) == 1
