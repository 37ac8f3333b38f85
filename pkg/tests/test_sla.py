"""SLA registry: registration, lookup ordering, validation monotonicity."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridslice.errors import DuplicateId, InvalidSla, NoSlaOnFile
from gridslice.intent_dsl import ServiceRequirementSet, SliceCategory, Stakeholder
from gridslice.sla import KpiBounds, Sla, SlaRegistry


def make_sla(sla_id="sla-1", parties=(Stakeholder.DSO, Stakeholder.CSP), **kwargs):
    defaults = dict(
        permitted_categories=frozenset({SliceCategory.URLLC, SliceCategory.MMTC, SliceCategory.EMBB}),
        kpi_bounds=KpiBounds(
            min_latency_ms=1.0,
            max_reliability=0.99999,
            max_bandwidth_mbps=100.0,
            max_device_count=10**6,
        ),
        priority=1,
    )
    defaults.update(kwargs)
    return Sla(id=sla_id, parties=parties, **defaults)


def wams_reqs(**overrides):
    values = dict(
        category=SliceCategory.URLLC,
        latency_bound_ms=10.0,
        reliability=0.99999,
        bandwidth_mbps=1.0,
        device_count=50,
        endpoints=("pmu-group-7", "central-pdc"),
    )
    values.update(overrides)
    return ServiceRequirementSet(**values)


class TestRegister:
    def test_happy_path(self):
        registry = SlaRegistry()
        assert registry.register(make_sla()) == "sla-1"
        assert registry.get("sla-1") is not None

    def test_duplicate_id(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        with pytest.raises(DuplicateId):
            registry.register(make_sla())

    def test_empty_categories_invalid(self):
        registry = SlaRegistry()
        with pytest.raises(InvalidSla):
            registry.register(make_sla(permitted_categories=frozenset()))

    def test_same_parties_invalid(self):
        registry = SlaRegistry()
        with pytest.raises(InvalidSla):
            registry.register(make_sla(parties=(Stakeholder.DSO, Stakeholder.DSO)))

    def test_empty_bound_interval_invalid(self):
        registry = SlaRegistry()
        with pytest.raises(InvalidSla):
            registry.register(
                make_sla(kpi_bounds=KpiBounds(max_reliability=0.0))
            )


class TestLookup:
    def test_empty_registry(self):
        assert SlaRegistry().lookup((Stakeholder.DSO, Stakeholder.CSP)) == []

    def test_priority_ordering(self):
        registry = SlaRegistry()
        registry.register(make_sla("sla-b", priority=2))
        registry.register(make_sla("sla-a", priority=1))
        ids = [s.id for s in registry.lookup((Stakeholder.DSO, Stakeholder.CSP))]
        assert ids == ["sla-a", "sla-b"]

    def test_tie_breaks_by_id(self):
        registry = SlaRegistry()
        registry.register(make_sla("sla-z", priority=1))
        registry.register(make_sla("sla-a", priority=1))
        ids = [s.id for s in registry.lookup((Stakeholder.DSO, Stakeholder.CSP))]
        assert ids == ["sla-a", "sla-z"]

    def test_invalidated_excluded(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        registry.invalidate("sla-1")
        assert registry.lookup((Stakeholder.DSO, Stakeholder.CSP)) == []


class TestValidate:
    def test_wams_accepted(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        result = registry.validate(wams_reqs(), Stakeholder.DSO)
        assert result.accepted
        assert result.sla_id == "sla-1"

    def test_category_rejected(self):
        registry = SlaRegistry()
        registry.register(make_sla(permitted_categories=frozenset({SliceCategory.MMTC})))
        result = registry.validate(wams_reqs(), Stakeholder.DSO)
        assert not result.accepted
        assert any("category" in r for r in result.reasons)

    def test_reliability_above_ceiling_rejected(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        result = registry.validate(wams_reqs(reliability=0.999999), Stakeholder.DSO)
        assert not result.accepted
        assert any("reliability" in r for r in result.reasons)

    def test_all_violations_listed(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        result = registry.validate(
            wams_reqs(reliability=0.9999999, latency_bound_ms=0.5, bandwidth_mbps=500.0),
            Stakeholder.DSO,
        )
        assert not result.accepted
        assert len(result.reasons) == 3

    def test_no_sla_on_file(self):
        registry = SlaRegistry()
        registry.register(make_sla())
        with pytest.raises(NoSlaOnFile):
            registry.validate(wams_reqs(), Stakeholder.PROSUMER)

    def test_governing_sla_is_lowest_priority_number(self):
        registry = SlaRegistry()
        registry.register(
            make_sla("sla-loose", priority=2)
        )
        registry.register(
            make_sla(
                "sla-strict",
                priority=1,
                kpi_bounds=KpiBounds(max_reliability=0.999),
            )
        )
        result = registry.validate(wams_reqs(), Stakeholder.DSO)
        assert result.sla_id == "sla-strict"
        assert not result.accepted


# --- monotonicity property -------------------------------------------------------

bounds_st = st.builds(
    KpiBounds,
    min_latency_ms=st.floats(0.0, 50.0),
    max_reliability=st.floats(0.5, 1.0, exclude_min=False),
    max_bandwidth_mbps=st.floats(1.0, 500.0),
    max_device_count=st.integers(1, 10**6),
)

reqs_st = st.builds(
    wams_reqs,
    latency_bound_ms=st.floats(0.1, 100.0),
    reliability=st.floats(0.0, 1.0),
    bandwidth_mbps=st.floats(0.1, 1000.0),
    device_count=st.integers(1, 10**7),
)

tighten_st = st.tuples(
    st.floats(0.0, 10.0),  # latency reduction
    st.floats(0.0, 0.5),  # reliability increase
    st.floats(0.0, 100.0),  # bandwidth increase
    st.integers(0, 10**5),  # device increase
)


@given(bounds=bounds_st, reqs=reqs_st, delta=tighten_st)
@settings(max_examples=300)
def test_tightening_never_turns_rejected_into_accepted(bounds, reqs, delta):
    """For a fixed SLA, pointwise-tightening a requirement set can only move
    verdicts toward rejection."""
    registry = SlaRegistry()
    registry.register(make_sla(kpi_bounds=bounds))

    d_lat, d_rel, d_bw, d_dev = delta
    tightened = ServiceRequirementSet(
        category=reqs.category,
        latency_bound_ms=max(1e-6, reqs.latency_bound_ms - d_lat),
        reliability=min(1.0, reqs.reliability + d_rel),
        bandwidth_mbps=reqs.bandwidth_mbps + d_bw,
        device_count=reqs.device_count + d_dev,
        endpoints=reqs.endpoints,
    )
    before = registry.validate(reqs, Stakeholder.DSO).accepted
    after = registry.validate(tightened, Stakeholder.DSO).accepted
    if not before:
        assert not after
