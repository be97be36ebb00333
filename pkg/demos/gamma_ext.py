"""Ext^(1,2) over the Weierstrass Hopf algebroid is Z/12, generated by [r]."""
from tqmf import builtin
from tqmf.cobar import cocycle_class, ext_table

table = ext_table(builtin("weierstrass-gamma"), s_max=2, n_max=6)
for (s, n), group in sorted(table.entries.items()):
    if not group.is_trivial():
        print(f"Ext^({s},{n}) = {group}")
print("[r] generates Ext^(1,2):", cocycle_class(table, table.named["[r]"].representative).generates())
