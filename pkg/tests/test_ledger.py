import json

import sympy as sp

from phasequant.ledger import build_ledger, compare_gcal4, ledger_json, printed_gcal2
from phasequant.starexp import generic_gcal

REQUIRED = [
    "gcal2_coefficients",
    "f2_g2_closed_forms",
    "wigner_mode_normalization",
    "laguerre_generating_function",
    "sdw_a2_prefactor",
    "delta2_a2_sign",
]


def test_required_entries_present_with_quotes():
    entries = {e.formula_id: e for e in build_ledger()}
    for fid in REQUIRED:
        e = entries[fid]
        assert e.status == "discrepancy"
        assert e.location_quote
        assert e.paper_expr and e.computed_expr
        assert e.paper_expr != e.computed_expr


def test_ids_are_unique():
    ids = [e.formula_id for e in build_ledger()]
    assert len(ids) == len(set(ids))


def test_json_roundtrip():
    doc = json.loads(ledger_json())
    assert doc["n_discrepancies"] == sum(e["status"] == "discrepancy" for e in doc["entries"])
    assert doc["n_discrepancies"] >= 6
    for e in doc["entries"]:
        assert {"formula_id", "paper_expr", "computed_expr", "location_quote", "status"} <= set(e)


def test_gcal2_printed_differs_from_recursion():
    diff = sp.expand(printed_gcal2() - generic_gcal(2))
    assert diff != 0
    entry = next(e for e in build_ledger() if e.formula_id == "gcal2_coefficients")
    assert entry.first_differing_order == "sigma^2"


def test_live_checks_carry_values():
    entries = {e.formula_id: e for e in build_ledger()}
    f2 = entries["f2_g2_closed_forms"].check
    assert abs(f2["F2_at_1"] - f2["e_over_2"]) < 1e-12
    gen = entries["laguerre_generating_function"].check
    assert abs(gen["closed_form"] - gen["sum_without_factorial"]) < 1e-12
    assert abs(gen["closed_form"] - gen["sum_with_factorial"]) > 1e-3
    for fid in ("coulomb_eps2", "yukawa_eps2"):
        assert entries[fid].status == "agrees"
        assert entries[fid].check["max_abs_difference"] < 1e-12


def test_gcal4_comparison_is_term_by_term():
    cmp = compare_gcal4()
    assert cmp["n_terms"] == len(cmp["terms"])
    assert cmp["n_matching"] == sum(t["match"] for t in cmp["terms"])
    assert cmp["first_differing_order"] is not None
