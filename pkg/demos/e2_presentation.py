"""Compare two ring presentations of E2 with direct cobar cohomology at low degree."""
from tqmf import builtin
from tqmf.cobar import ext_table
from tqmf.sseq import EXTRA_RELATIONS, DescentSS, assemble_e2

table = ext_table(builtin("de-rham-sigma"), s_max=3, n_max=8)
for name in ("stated", "corrected"):
    page = assemble_e2(8, 3, presentation=name, table=table, strict=False)
    print(f"{name:9s} (1,5): {DescentSS(name).group(1, 5)}; {page.checks[0].detail}")
print("relations added by the corrected presentation:", ", ".join(EXTRA_RELATIONS))
for check in page.checks[1:]:
    print(f"  {check.subject}: {'holds' if check.passed else 'FAILS'}")
