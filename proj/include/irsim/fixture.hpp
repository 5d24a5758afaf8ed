#pragma once

#include <cstdint>

#include "irsim/config_io.hpp"
#include "irsim/model.hpp"

namespace irsim {

/// Desk-scale 10-class classification task: 15-channel 16x16 binary inputs
/// carrying noisy per-class channel codes, a digital majority-denoise front,
/// three grouped-convolution layers (group size 15, 135 conv rows per
/// channel) and a digital code-matching classifier. The same function is
/// provided twice: ternary weights for the proposed mapping and binary
/// weights plus per-channel BN for the baseline mapping. The config scales
/// the sensing window to the reduced column height (540-row channels at the
/// full window correspond to 135-row channels at a quarter of it).
struct FixtureBundle {
  TernaryConvModel proposed;
  TernaryConvModel baseline;
  Dataset test;
  Dataset calibration;
  SimulationConfig config;
};

FixtureBundle synthesize_classification_fixture(uint64_t seed = 7, int test_samples = 160,
                                                int calib_samples = 64);

/// Full-scale extra-bias calibration study: one 540-row ternary layer whose
/// pair current differences sit in a band under the default 35-unit sensing
/// lower bound until a positive extra bias shifts them clear of it.
struct CalibrationFixture {
  TernaryConvModel model;
  Dataset calibration;
  SimulationConfig config;
};

CalibrationFixture synthesize_calibration_fixture(uint64_t seed = 11, int samples = 256);

}  // namespace irsim
