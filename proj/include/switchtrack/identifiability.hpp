#pragma once

#include <cstdint>

#include "switchtrack/types.hpp"

namespace switchtrack {

struct IdentifiabilityReport {
  int n = 0;
  int c = 0;
  int k_sparsity = 0;       // per-row nonzero bound K
  int rank_x = 0;
  int kruskal_rank_xt = 0;
  bool prop1_ok = false;    // N <= C and X full row rank
  bool prop2_ok = false;    // kr(X^T) >= 2K + 1
};

/// Largest k (capped at max_check when set) such that every k-column subset
/// has full column rank; exhaustive subset enumeration. A matrix with a zero
/// column has Kruskal rank 0. Guard: c <= 25 unless max_check is set.
int kruskal_rank(const Matrix& m, int max_check = -1);

int numerical_rank(const Matrix& m);

IdentifiabilityReport check_prop1(const Matrix& x);
IdentifiabilityReport check_prop2(const Matrix& x, int k_sparsity);

/// Brute-force uniqueness check for the sparse identifiability argument:
/// per column of F = (I - A^T) B^{-1}, enumerates all supports of size
/// <= 2K+1 containing the diagonal, solves the restricted LS of Y^T f = X^T
/// column, and confirms that every near-zero-residual solution agrees with
/// the closed-form F. Guard: N <= 8.
bool verify_sparse_uniqueness(const Matrix& y, const Matrix& x, int k_sparsity);

/// Fraction of random hollow A draws (spectrally scaled as in the generator)
/// with |det(I - A^T)| > 1e-12.
double lemma1_empirical(int n_trials, int n, double density, std::uint64_t rng_seed);

}  // namespace switchtrack
