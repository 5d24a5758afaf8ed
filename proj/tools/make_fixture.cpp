#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "irsim/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"generate the desk-scale classification fixture and the calibration study fixture"};
  std::string out_dir = "fixtures";
  uint64_t seed = 7;
  int test_samples = 160, calib_samples = 64;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--test-samples", test_samples, "test set size");
  app.add_option("--calib-samples", calib_samples, "calibration set size");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    auto path = [&](const std::string& name) { return out_dir + "/" + name; };

    auto fb = irsim::synthesize_classification_fixture(seed, test_samples, calib_samples);
    fb.proposed.save(path("proposed.model"));
    fb.baseline.save(path("baseline.model"));
    fb.test.save(path("test.data"));
    fb.calibration.save(path("calib.data"));
    fb.config.save(path("desk.config"));

    auto cf = irsim::synthesize_calibration_fixture(seed + 4);
    cf.model.save(path("band.model"));
    cf.calibration.save(path("band.data"));
    cf.config.save(path("fullscale.config"));

    std::cout << "wrote fixture files to " << out_dir << "/\n";
    std::cout << "  proposed.model baseline.model test.data calib.data desk.config\n";
    std::cout << "  band.model band.data fullscale.config\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
