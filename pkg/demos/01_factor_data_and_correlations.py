# Simulating dichotomous item responses from a known factor structure
# and recovering the latent correlations.
#
# Story: two correlated abilities, five 0/1 items each. The product-
# moment (phi) correlations of binary items understate the latent
# associations; the tetrachoric estimator recovers them.

import numpy as np

from egakit import (FactorSpec, build_implied_sigma, dichotomize,
                    pearson_matrix, sample_dataset, tetrachoric_matrix)

spec = FactorSpec(n_factors=2, items_per_factor=5, factor_corr=0.5)
sigma = build_implied_sigma(spec)
print("population covariance (first factor block):")
print(sigma[:5, :5])

continuous = sample_dataset(sigma, n=2000, seed=42)
binary = dichotomize(continuous)
print(f"\nsimulated {binary.n_obs} x {binary.n_items} binary responses; "
      f"item means: {np.round(binary.values.mean(axis=0), 3)}")

phi = pearson_matrix(binary.values.astype(float))
tet = tetrachoric_matrix(binary.values)

# Latent within-factor correlation is 0.5; phi shrinks it to ~1/3.
within = np.s_[0, 1]
between = np.s_[0, 5]
print(f"\nwithin-factor pair:  phi = {phi.values[within]:+.3f}   "
      f"tetrachoric = {tet.values[within]:+.3f}   (latent 0.500)")
print(f"between-factor pair: phi = {phi.values[between]:+.3f}   "
      f"tetrachoric = {tet.values[between]:+.3f}   (latent 0.250)")
