#pragma once

#include <cstddef>

namespace toepspec {

/// All numerical thresholds used across the library. Every routine that needs
/// a tolerance takes it from here (or from an explicit override).
struct Tolerances {
  // numerics
  double eig_rel = 1e-10;        // eigenpair residual, relative to ||A||
  int max_qr_sweeps = 30;        // QR iterations allowed per eigenvalue
  double rank_rel = 1e-10;       // numerical_rank threshold relative to sigma_max
  double fft_roundtrip = 1e-12;

  // symbols
  double singular_point = 1e-12;  // distance at which x hits a singular point
  int coeff_grid_1d = 1024;
  int coeff_grid_2d = 128;
  int coeff_grid_3d = 32;

  // spectral analysis
  double tol_d = 1e-6;             // sectorial vs weakly sectorial
  double nondegeneracy_var = 1e-10;
  int range_grid_1d = 256;
  int range_grid_2d = 64;
  int range_grid_3d = 16;
  int angle_count = 720;
  int region_pixels = 256;
  double region_padding = 0.2;
  double outlier_eps = 0.1;

  // krylov
  double gmres_tol = 1e-6;
  double arnoldi_breakdown = 1e-14;
};

/// Process-wide defaults. Read-only after first use.
const Tolerances& default_tolerances();

/// Largest dense matrix order accepted by eig/svd/assembly. Defaults to 2048,
/// overridable through the TOEPSPEC_MAX_ORDER environment variable.
std::size_t max_dense_order();

}  // namespace toepspec
