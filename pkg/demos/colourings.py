# Acyclic homomorphisms on small digraphs: search, enumeration, cores.
from girthforge import Digraph, directed_cycle, enumerate_acyclic_homs, is_core, is_pointed, transitive_tournament
from girthforge.homs import automorphisms, core_witness, pointed_witness

C3 = directed_cycle(3)
TT3 = transitive_tournament(3)
digon = directed_cycle(2)

print("C3 -> C3:", [r.image for r in enumerate_acyclic_homs(C3, C3)])
print("automorphisms of C3:", [f.image for f in automorphisms(C3)])

# TT3 is acyclic, so it collapses to one vertex
print("TT3 core?", is_core(TT3), "witness", core_witness(TT3).image)

# the directed 4-cycle folds onto a digon two vertices at a time
C4 = directed_cycle(4)
print("C4 -> digon:", [r.image for r in enumerate_acyclic_homs(C4, digon)])

# pointedness: a core is pointed with respect to itself
print("C3 pointed for C3:", is_pointed(C3, C3))
a, b = pointed_witness(digon, C3)
print("digon not pointed for C3:", a.image, b.image)

# count cores among all labeled digraphs on three vertices
from girthforge import all_labeled_digraphs

cores = [D.arcs for D in all_labeled_digraphs(3) if is_core(D)]
print(len(cores), "cores on 3 labeled vertices:", cores)
