"""Build set functions, probe marginal gains, and classify structure.

The ground set is always the integers 1..m, shared by every function.
Coverage counts covered items, so its gains shrink as the selection
grows; the pair function is built to do the opposite on one designated
pair, which is what drives its ratio below 1.
"""

from distgreedy import build_test_function, check_structure, marginal_gain

coverage = build_test_function(
    "coverage",
    {"universe": 6, "sets": [[1, 2, 3], [3, 4], [5], [4, 5, 6]]})

print("coverage over 6 items, 4 candidate sets")
print("  f({1})        =", coverage([1]))
print("  f({1,4})      =", coverage([1, 4]))
print("  f(everything) =", coverage(range(1, 5)))

print("\ngains diminish as the selection grows:")
for base in ([], [1], [1, 4]):
    print(f"  gain of element 2 given {base or '{}'}:",
          marginal_gain(coverage, 2, base))

report = check_structure(coverage)
print("\nexhaustive classification:", report)

pair = build_test_function("pair_supermodular",
                           {"size": 3, "pair": (1, 2), "g": (0, 1, 3)})
print("\npair function: one element is worth 1, the pair together 3")
print("  gain of 2 given {}  :", marginal_gain(pair, 2, []))
print("  gain of 2 given {1} :", marginal_gain(pair, 2, [1]), "(grew!)")

report = check_structure(pair)
print("  classification:", report)
print("  tightest pair for the ratio:", report.ratio_witness,
      "-> two unit gains against a joint step of 3")
