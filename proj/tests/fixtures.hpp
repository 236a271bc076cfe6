#ifndef DASJOINT_TESTS_FIXTURES_HPP_
#define DASJOINT_TESTS_FIXTURES_HPP_

#include "dasjoint/datagen.hpp"

namespace dasjoint::testing {

// The calibrated three-arm setup, scaled to a per-arm size that suits the
// test at hand.
inline GenConfig scaled_example_config(int n_per_arm) {
  GenConfig gen = example_gen_config();
  gen.n_per_arm = {n_per_arm, n_per_arm, n_per_arm};
  return gen;
}

// Documented truth for recovery studies: an identifiable design with a
// visit schedule dense around the change points, moderate informative
// dropout on both risks, and full trajectory coupling.
inline GenConfig recovery_gen_config(int n_per_arm) {
  GenConfig gen = scaled_example_config(n_per_arm);
  gen.visit_weeks = {0,  2,  4,  6,  8,  10, 12, 14,  16,  20,
                     24, 28, 32, 40, 52, 64, 80, 104, 128, 156};
  Hyperparams& h = gen.truth;
  h.sigma2_resid = 0.02;
  h.phi[0] << 6.1, -0.2, 0.0;
  h.phi[1] << 6.5, -0.7, -0.45;
  h.omega[0] << -0.25, -1.5, -20.0;
  h.omega[1] << -0.5, -3.0, -40.0;
  h.varsigma2[0].setConstant(1.0);
  h.varsigma2[1].setConstant(1.0);
  gen.noninformative_weekly_hazard = 0.001;
  return gen;
}

}  // namespace dasjoint::testing

#endif  // DASJOINT_TESTS_FIXTURES_HPP_
