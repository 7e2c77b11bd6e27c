#pragma once

namespace lorentz {

// Every numerical threshold used by the library, with its default.
// Spec files may override individual entries by name.
struct Tolerances {
  double metric_degenerate_det = 1e-12;   // |det g| below this is degenerate
  double metric_inverse_check = 1e-10;    // max |g g^-1 - I|
  double isotropy_rel = 1e-9;             // |g(v,v)| <= tol * ||v||_euc^2 counts as isotropic
  double curvature_symmetry = 1e-9;       // relative pair/Bianchi symmetry deviation
  double plane_degenerate = 1e-10;        // |det induced plane metric| for sectional curvature
  double plane_sample_floor = 1e-3;       // resample threshold for random plane draws
  double geodesy_certificate = 1e-7;      // deviation below this certifies geodesy
  double geodesy_reject = 1e-4;           // deviation above this rejects geodesy
  double classify_geodesic = 1e-7;        // max |II| for the geodesic class
  double classify_umbilical = 1e-7;       // max |II - g*n| for the umbilical class
  double normal_check = 1e-9;             // tangency tolerance for Weingarten inputs
  double weingarten_duality = 1e-8;       // shape operator / II pairing residual
  double lightlike_det = 1e-10;           // induced-metric degeneracy for lightlike tests
  double killing_accept = 1e-8;           // Killing residual certificate
  double null_search_accept = 1e-6;       // max |g(V,V)| over grid for null field search
  double null_min_norm = 1e-6;            // returned fields must clear this norm on the grid
  double homothety_variation = 1e-8;      // holonomy ratio variation certificate
  double homothety_reject = 1e-3;         // ratio variation above this fails the check
  double conformal_entry = 1e-8;          // entrywise conformal fit in block checks
  double block_off_max = 1e-9;            // max |g_ab| across base/fiber index pairs
  double cone_fraction = 0.95;            // accepted grid fraction that names the cone class
  double cluster_merge = 3.0;             // cluster merge radius, in grid spacings
  double span_singular_value = 1e-8;      // rank cutoff for span estimation
  double rank_singular_value = 1e-8;      // immersion differential rank cutoff
  double energy_drift = 1e-8;             // relative g(v,v) drift along geodesics
  double fiber_spread = 1e-6;             // constant-curvature spread certificate
  double fiber_spread_reject = 1e-4;      // spread above this fails the check
  double warp_positive = 1e-10;           // warp functions must exceed this on the box
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t;
  return t;
}

}  // namespace lorentz
