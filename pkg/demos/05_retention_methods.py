# The six classical retention rules side by side on one dataset.
#
# Convention mirrored from applied practice: the fit/partial-based
# rules (VSS, MAP, BIC, EBIC) score the product-moment matrix of the
# 0/1 items; parallel analysis and the eigenvalue rule work from
# tetrachoric correlations.

from egakit import (FactorSpec, bic_select, build_implied_sigma, dichotomize,
                    ebic_select, kaiser_rule, map_select, parallel_analysis,
                    pearson_matrix, sample_dataset, tetrachoric_matrix,
                    vss_select)

spec = FactorSpec(n_factors=2, items_per_factor=5, factor_corr=0.5)
binary = dichotomize(sample_dataset(build_implied_sigma(spec), 1000, seed=21))
n = binary.n_obs

phi = pearson_matrix(binary.values.astype(float))
tet = tetrachoric_matrix(binary.values)

vss = vss_select(phi, n)
mp = map_select(phi, kmax=8)
bic = bic_select(phi, n)
ebic = ebic_select(phi, n)
pa = parallel_analysis(binary.values, seed=21)
kaiser = kaiser_rule(tet, eigen_basis="factors")

print("true number of factors: 2\n")
for est in (vss, mp, bic, ebic, pa, kaiser):
    print(f"  {est.method:7s} -> {est.k_hat}")

print("\nper-k diagnostics (first five):")
print("  vss :", [round(float(v), 3) for v in vss.statistics["vss"][:5]])
print("  map :", [round(float(v), 4) for v in mp.statistics["map"][:5]])
print("  bic :", [round(float(v), 1) for v in bic.statistics["bic"][:5]])
print("  pa  : observed ", [round(float(v), 2) for v in pa.statistics["observed"][:5]])
print("        reference", [round(float(v), 2) for v in pa.statistics["reference"][:5]])
