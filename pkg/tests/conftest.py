import pytest

from gridplan.network import Demand, Link, Network, Request, Site, make_star


def star(*slowdowns):
    return make_star(slowdowns)


def shared_request(n, sources, size=1):
    return Request("dest", tuple(Demand(f"f{i}", frozenset(sources), size) for i in range(n)))


def funnel(capacity=1):
    """Site_1 and Site_2 feed Site_3, which alone reaches Site_4."""
    sites = (Site("Site_1"), Site("Site_2"), Site("Site_3", capacity), Site("Site_4"))
    links = (Link("L13", "Site_1", "Site_3", 1), Link("L23", "Site_2", "Site_3", 1),
             Link("L34", "Site_3", "Site_4", 1))
    return Network(sites, links)


def funnel_request():
    return Request("Site_4", (Demand("A", frozenset({"Site_1"})), Demand("B", frozenset({"Site_2"}))))


@pytest.fixture
def two_replicas():
    """File F held at Site_1 and Site_2, wanted at Dest."""
    sites = (Site("Site_1"), Site("Site_2"), Site("Dest"))
    links = (Link("a", "Site_1", "Dest", 2), Link("b", "Site_2", "Dest", 3), Link("c", "Site_1", "Site_2", 1))
    return Network(sites, links), Request("Dest", (Demand("F", frozenset({"Site_1", "Site_2"})),))
