"""Print the formula ledger: printed expressions next to the recomputed ones."""
# %%
from phasequant.ledger import build_ledger

for entry in build_ledger():
    print(f"[{entry.status}] {entry.formula_id}")
    print(f"    printed : {entry.paper_expr}")
    print(f"    computed: {entry.computed_expr}")
