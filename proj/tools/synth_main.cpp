// Writes the generated leaf dataset used by the end-to-end checks.
#include <CLI11.hpp>

#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic class-per-folder leaf dataset"};
  app.option_defaults()->always_capture_default();
  leafpipe::synth::SyntheticSpec spec;
  std::string root;
  app.add_option("--output", root, "Dataset root to create")->required();
  app.add_option("--classes", spec.classes, "Number of classes")->check(CLI::Range(2, 64));
  app.add_option("--per-class", spec.per_class, "Images per class")->check(CLI::PositiveNumber);
  app.add_option("--size", spec.size, "Image side in pixels")->check(CLI::Range(8, 4096));
  app.add_option("--seed", spec.seed, "Random seed");
  app.add_option("--noise", spec.noise_std, "Pixel noise std")->check(CLI::Range(0.0, 1.0));
  CLI11_PARSE(app, argc, argv);
  try {
    leafpipe::synth::write_dataset(root, spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote " << spec.classes * spec.per_class << " images under " << root << '\n';
  return 0;
}
