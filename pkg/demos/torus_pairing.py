"""The torus group Z^2: homology from a presentation, and the cup pairing."""
from pathlib import Path

from simphom.homology import e_homology, hopf_check, pairing_matrix
from simphom.resolve import bilinear_cocycle, load_presentation, truncated_resolution

here = Path(__file__).resolve().parent
G = truncated_resolution(load_presentation(here / "torus.json"), 3)
for r in e_homology(G, N=2):
    print(f"H{r.degree} = {r.group}")

hopf = hopf_check(G, [("a b a^-1 b^-1", [("", 0, 1)], "generator")])
print("commutator relator class:", hopf["witnesses"][0]["class"]["coords"])

cup = bilinear_cocycle(G.pi, [[0, 1], [0, 0]])
print("cup pairing with H2 generator:", pairing_matrix(G, [cup], 2)["matrix"][0][0])
