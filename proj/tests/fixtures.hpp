#pragma once

#include "lsqtobit/model.hpp"
#include "lsqtobit/montecarlo.hpp"
#include "lsqtobit/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace fixture {

/// Two-covariate sample in the layout of the simulation study. A zero
/// censoring fraction puts psi far below every draw.
inline lsqtobit::Dataset sample(const lsqtobit::GeneratorFamily& family, double q, Eigen::Index n,
                                double censor_prop, std::uint64_t seed) {
  lsqtobit::Scenario sc;
  sc.family = family;
  sc.q = q;
  sc.n = n;
  sc.seed = seed;
  sc.calibration_draws = 20000;
  double psi = 1e-300;
  if (censor_prop > 0.0) {
    sc.censor_prop = censor_prop;
    psi = lsqtobit::calibrate_psi(sc);
  }
  return lsqtobit::simulate_scenario(sc, psi, 1);
}

/// Parameter point scattered around the simulation truth.
inline Eigen::VectorXd random_theta(lsqtobit::Rng& rng) {
  Eigen::VectorXd theta(4);
  theta << 1.0, 0.5, 1.0, 1.5;
  for (Eigen::Index j = 0; j < 4; ++j) theta[j] += 0.3 * rng.normal();
  return theta;
}

}  // namespace fixture
