import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridplan.network import (Demand, Link, Network, NetworkFormatError, Request, Schedule, ScheduleEntry,
                              SharedLinkGroup, Site, in_links, load_network, load_request, make_star,
                              network_to_dict, out_links, parse_network, request_to_dict, schedule_from_csv,
                              schedule_to_csv, transfer_duration, validate)

from conftest import funnel


def test_minimal_instance_is_ok():
    net = Network((Site("A"), Site("dest")), (Link("l", "A", "dest", 1),))
    res = validate(net, Request("dest", (Demand("f", frozenset({"A"})),)))
    assert res.ok and not res.notices


def test_demand_at_destination_is_dropped_with_notice():
    net = make_star([1])
    res = validate(net, Request("dest", (Demand("f", frozenset({"dest"})), Demand("g", frozenset({"S1"})))))
    assert res.ok
    assert any("already at destination" in n for n in res.notices)
    assert [d.name for d in res.request.demands] == ["g"]


def test_unreachable_demand():
    net = Network((Site("A"), Site("B"), Site("dest")), (Link("l", "A", "dest", 1),))
    res = validate(net, Request("dest", (Demand("f", frozenset({"B"})),)))
    assert not res.ok
    assert any("unreachable" in v for v in res.violations)
    assert res.unreachable == ["f"]


@pytest.mark.parametrize("size,slowdown,expected", [(1, 1, 1), (1, 4, 4), (3, 2, 6)])
def test_transfer_duration(size, slowdown, expected):
    assert transfer_duration(Demand("f", frozenset({"A"}), size), Link("l", "A", "B", slowdown)) == expected


@given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 5), st.integers(0, 5))
def test_transfer_duration_monotone(size, slowdown, ds, dk):
    base = transfer_duration(Demand("f", frozenset({"A"}), size), Link("l", "A", "B", slowdown))
    more = transfer_duration(Demand("f", frozenset({"A"}), size + ds), Link("l", "A", "B", slowdown + dk))
    assert more >= base


def test_incidence_sets():
    net = funnel()
    assert {l.id for l in in_links(net, "Site_3")} == {"L13", "L23"}
    assert {l.id for l in out_links(net, "Site_3")} == {"L34"}
    assert out_links(make_star([1, 2]), "dest") == []
    lonely = Network((Site("x"), Site("y")), ())
    assert in_links(lonely, "x") == [] and out_links(lonely, "x") == []
    with pytest.raises(KeyError):
        in_links(net, "nowhere")


def test_incidence_sets_disjoint():
    net = funnel()
    for s in net.site_ids:
        assert not {l.id for l in in_links(net, s)} & {l.id for l in out_links(net, s)}


def _five_site_doc():
    return {
        "sites": [{"id": f"S{i}", "storage": "unbounded"} for i in range(1, 5)] + [{"id": "dest", "storage": 3}],
        "links": [{"id": f"l{i}", "from": f"S{i}", "to": "dest", "slowdown": i} for i in range(1, 5)],
        "shared_groups": [{"members": ["l1", "l2"], "capacity": 2}],
    }


def test_load_network(tmp_path):
    p = tmp_path / "net.json"
    p.write_text(json.dumps(_five_site_doc()))
    net = load_network(p)
    assert len(net.sites) == 5
    assert net.site("dest").storage == 3
    assert net.shared_groups[0].members == ("l1", "l2")
    assert network_to_dict(net) == _five_site_doc()


def test_zero_slowdown_names_the_link():
    doc = _five_site_doc()
    doc["links"][2]["slowdown"] = 0
    with pytest.raises(NetworkFormatError, match="l3"):
        parse_network(json.dumps(doc))


def test_unknown_key_rejected():
    doc = _five_site_doc()
    doc["links"][0]["slowdwn"] = 2
    with pytest.raises(NetworkFormatError, match="slowdwn"):
        parse_network(json.dumps(doc))


def test_duplicate_demand_name(tmp_path):
    p = tmp_path / "req.json"
    p.write_text(json.dumps({"destination": "dest", "demands": [
        {"name": "f", "size": 1, "origins": ["S1"]}, {"name": "f", "size": 1, "origins": ["S2"]}]}))
    with pytest.raises(NetworkFormatError, match="duplicate"):
        load_request(p, make_star([1, 2]))
    with pytest.raises(NetworkFormatError, match="duplicate"):
        load_request(p)


def test_request_round_trip(tmp_path):
    req = Request("dest", (Demand("f", frozenset({"S1", "S2"}), 2),))
    p = tmp_path / "req.json"
    p.write_text(json.dumps(request_to_dict(req)))
    assert load_request(p, make_star([1, 2])) == req


def test_shared_group_validation():
    net = make_star([1, 2])
    bad = Network(net.sites, net.links, (SharedLinkGroup(("S1-dest", "nope"), 1),))
    assert any("unknown links" in v for v in validate(bad).violations)
    vacuous = Network(net.sites, net.links, (SharedLinkGroup(("S1-dest", "S2-dest"), 3),))
    res = validate(vacuous)
    assert res.ok and res.warnings


def test_network_invariants():
    res = validate(Network((Site("a"), Site("a", 0)), (Link("l", "a", "a", 1), Link("l", "a", "zz", 1))))
    text = " ".join(res.violations)
    for fragment in ("duplicate site", "storage", "self-loop", "duplicate link", "unknown site"):
        assert fragment in text


def test_schedule_csv_round_trip():
    net = make_star([1, 2])
    sched = Schedule((ScheduleEntry("f1", "S2-dest", 0, 2), ScheduleEntry("f0", "S1-dest", 0, 1)))
    text = schedule_to_csv(sched, net)
    assert text.splitlines()[0] == "demand,link,from,to,start,end"
    assert text.splitlines()[1] == "f0,S1-dest,S1,dest,0,1"
    assert set(schedule_from_csv(text).entries) == set(sched.entries)
    assert Schedule().makespan == 0


@settings(max_examples=300)
@given(st.binary(max_size=200))
def test_loader_never_crashes_on_bytes(data):
    try:
        net = parse_network(data)
    except NetworkFormatError:
        return
    assert validate(net).ok


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-3, 3) | st.sampled_from(["a", "b", "dest", "unbounded", ""]),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(
        st.sampled_from(["sites", "links", "shared_groups", "id", "from", "to", "slowdown", "storage",
                         "members", "capacity", "x"]), inner, max_size=4),
    max_leaves=12)


@settings(max_examples=300)
@given(json_values)
def test_loader_never_crashes_on_structured_json(doc):
    try:
        net = parse_network(json.dumps(doc))
    except NetworkFormatError:
        return
    assert validate(net).ok
