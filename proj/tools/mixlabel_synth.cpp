// Writes a synthetic demo dataset (clouds, labels, cameras, masks, manifest).
#include <iostream>

#include <CLI11.hpp>

#include "mixlabel/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic camera-rig dataset for the mixlabel CLI"};
  std::filesystem::path out = "demo";
  mixlabel::synth::DemoParams params;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--scenes", params.scenes, "Number of scenes")->capture_default_str();
  app.add_option("--seed", params.seed, "Generator seed")->capture_default_str();
  app.add_flag("--corrupt-masks", params.corrupt_masks, "Over-segment masks and bleed them across objects");
  CLI11_PARSE(app, argc, argv);

  try {
    mixlabel::synth::write_demo_dataset(out, params);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << params.scenes << " scenes to " << out.string() << "\n";
  return 0;
}
