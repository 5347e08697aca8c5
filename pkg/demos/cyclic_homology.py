"""Integral homology of small finite groups, computed twice.

Runs the Kan loop group route and the normalized bar complex side by side.
"""
from simphom.freegrp import abelian_group, cyclic_group
from simphom.homology import bar_oracle, compare, e_homology
from simphom.resolve import kan_loop_group, nerve

N = 3
for G in (cyclic_group(2), cyclic_group(3), cyclic_group(4), abelian_group([2, 2])):
    res = e_homology(kan_loop_group(nerve(G, N + 1), N))
    agree = compare(res, bar_oracle(G, N))["match"]
    groups = ", ".join(f"H{r.degree}={r.group}" for r in res)
    print(f"{G.name:10s} {groups}   bar complex agrees: {agree}")
